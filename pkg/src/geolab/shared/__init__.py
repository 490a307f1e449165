"""Shared configuration, logging, errors and validated models."""
