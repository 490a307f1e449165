"""Pseudo-spectral laboratory for anisotropic geophysical flows and their singular limits."""

__version__ = "0.1.0"
