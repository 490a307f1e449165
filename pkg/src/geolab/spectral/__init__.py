"""Periodic-box Fourier infrastructure."""

from geolab.spectral.field import (
    Axis,
    DimensionMismatchError,
    SpectralError,
    SpectralField,
    TransformDirection,
    derivative,
    project_symmetry,
    symmetry_residual,
    transform,
)
from geolab.spectral.grid import Grid, Grid2, Grid3, GridError, SymmetryClass
from geolab.spectral.operators import (
    GaugeViolationError,
    InvalidNormError,
    NormKind,
    advection,
    barotropic_project,
    dealiased_product,
    leray_project,
    norm,
    poisson_aniso,
    vertical_integral,
)

__all__ = [
    "Axis",
    "DimensionMismatchError",
    "GaugeViolationError",
    "Grid",
    "Grid2",
    "Grid3",
    "GridError",
    "InvalidNormError",
    "NormKind",
    "SpectralError",
    "SpectralField",
    "SymmetryClass",
    "TransformDirection",
    "advection",
    "barotropic_project",
    "dealiased_product",
    "derivative",
    "leray_project",
    "norm",
    "poisson_aniso",
    "project_symmetry",
    "symmetry_residual",
    "transform",
    "vertical_integral",
]
