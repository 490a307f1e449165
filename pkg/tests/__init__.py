"""Unit tests for geolab."""
