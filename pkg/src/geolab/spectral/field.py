"""Spectral fields on periodic grids.

A SpectralField stores normalized Fourier amplitudes (coeffs = fftn(values) / N),
so the mean of the field is coeffs[0, ...] and Parseval reads
mean(values**2) = sum(|coeffs|**2). Fields are immutable; physical values are
materialized on demand and cached. A field built from physical values keeps
exactly those values as its cache.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np
import scipy.fft

from geolab.shared.errors import GeolabError
from geolab.spectral.grid import Grid, Grid3, SymmetryClass


class SpectralError(GeolabError, ValueError):
    """Invalid spectral operation."""


class DimensionMismatchError(SpectralError):
    """Array or field does not match the expected grid."""


class TransformDirection(str, Enum):
    """Direction of a transform."""

    FORWARD = "fwd"
    INVERSE = "inv"


class Axis(str, Enum):
    """Spatial axis of a derivative."""

    X = "x"
    Y = "y"
    Z = "z"

    @property
    def index(self) -> int:
        return {"x": 0, "y": 1, "z": 2}[self.value]


_fft_workers: int | None = None


def fft_workers() -> int:
    """Threads used by scipy.fft, from GEOLAB_FFT_WORKERS."""
    global _fft_workers
    if _fft_workers is None:
        from geolab.shared.config import get_config

        _fft_workers = get_config().settings.fft_workers
    return _fft_workers


def forward_fft(values: np.ndarray) -> np.ndarray:
    """Normalized forward transform of a real array."""
    return scipy.fft.fftn(values, workers=fft_workers()) / values.size


def inverse_fft(coeffs: np.ndarray) -> np.ndarray:
    """Real part of the inverse of forward_fft."""
    return scipy.fft.ifftn(coeffs * coeffs.size, workers=fft_workers()).real


def _readonly(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Real scalar field stored as Fourier coefficients.

    Attributes:
        grid: Grid the field lives on
        coeffs: Complex amplitudes, shape grid.shape, numpy FFT order
        sym: z-symmetry class (NONE on 2-D grids)
    """

    grid: Grid
    coeffs: np.ndarray
    sym: SymmetryClass = SymmetryClass.NONE
    _physical: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if coeffs.shape != self.grid.shape:
            msg = f"Coefficient shape {coeffs.shape} does not match grid shape {self.grid.shape}"
            raise DimensionMismatchError(msg)
        if self.sym is not SymmetryClass.NONE and not isinstance(self.grid, Grid3):
            msg = "z-symmetry classes require a 3-D grid"
            raise SpectralError(msg)
        object.__setattr__(self, "coeffs", _readonly(coeffs))

    @classmethod
    def from_physical(
        cls, grid: Grid, values: np.ndarray, sym: SymmetryClass = SymmetryClass.NONE
    ) -> "SpectralField":
        """Build a field from collocation values (kept verbatim as the physical cache)."""
        values = np.array(values, dtype=np.float64, copy=True)
        if values.shape != grid.shape:
            msg = f"Physical array shape {values.shape} does not match grid shape {grid.shape}"
            raise DimensionMismatchError(msg)
        return cls(grid, forward_fft(values), sym, _readonly(values))

    @classmethod
    def zeros(cls, grid: Grid, sym: SymmetryClass = SymmetryClass.NONE) -> "SpectralField":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128), sym)

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "SpectralField":
        coeffs = np.zeros(grid.shape, dtype=np.complex128)
        coeffs.flat[0] = value
        sym = SymmetryClass.EVEN if isinstance(grid, Grid3) else SymmetryClass.NONE
        return cls(grid, coeffs, sym, _readonly(np.full(grid.shape, float(value))))

    @property
    def has_physical_cache(self) -> bool:
        return self._physical is not None

    def physical(self) -> np.ndarray:
        """Collocation values (read-only)."""
        if self._physical is None:
            object.__setattr__(self, "_physical", _readonly(inverse_fft(self.coeffs)))
        assert self._physical is not None
        return self._physical

    def with_coeffs(self, coeffs: np.ndarray, sym: SymmetryClass | None = None) -> "SpectralField":
        """New field on the same grid."""
        return SpectralField(self.grid, coeffs, self.sym if sym is None else sym)

    def check_compatible(self, other: "SpectralField") -> None:
        if other.grid != self.grid:
            msg = f"Grid mismatch: {self.grid} vs {other.grid}"
            raise DimensionMismatchError(msg)

    @property
    def mean(self) -> float:
        return float(self.coeffs.flat[0].real)

    def _combine(
        self, other: Union["SpectralField", float], sign: float
    ) -> "SpectralField":
        if isinstance(other, SpectralField):
            self.check_compatible(other)
            coeffs = self.coeffs + sign * other.coeffs
            sym = self.sym if self.sym is other.sym else SymmetryClass.NONE
            cache = None
            if self._physical is not None and other._physical is not None:
                cache = _readonly(self._physical + sign * other._physical)
            return SpectralField(self.grid, coeffs, sym, cache)
        value = sign * float(other)
        coeffs = self.coeffs.copy()
        coeffs.flat[0] += value
        sym = self.sym
        if value != 0.0 and sym is SymmetryClass.ODD:
            sym = SymmetryClass.NONE
        cache = None if self._physical is None else _readonly(self._physical + value)
        return SpectralField(self.grid, coeffs, sym, cache)

    def __add__(self, other: Union["SpectralField", float]) -> "SpectralField":
        return self._combine(other, 1.0)

    def __radd__(self, other: float) -> "SpectralField":
        return self._combine(other, 1.0)

    def __sub__(self, other: Union["SpectralField", float]) -> "SpectralField":
        return self._combine(other, -1.0)

    def __rsub__(self, other: float) -> "SpectralField":
        return (-self)._combine(other, 1.0)

    def __neg__(self) -> "SpectralField":
        return self * -1.0

    def __mul__(self, scalar: float) -> "SpectralField":
        if isinstance(scalar, SpectralField):
            msg = "Use dealiased_product for field products"
            raise SpectralError(msg)
        cache = None if self._physical is None else _readonly(self._physical * float(scalar))
        return SpectralField(self.grid, self.coeffs * float(scalar), self.sym, cache)

    def __rmul__(self, scalar: float) -> "SpectralField":
        return self * scalar

    def __truediv__(self, scalar: float) -> "SpectralField":
        return self * (1.0 / float(scalar))


def transform(
    obj: SpectralField | np.ndarray,
    direction: TransformDirection | str,
    grid: Grid | None = None,
    sym: SymmetryClass = SymmetryClass.NONE,
) -> SpectralField | np.ndarray:
    """Move a field between physical and spectral representations.

    Args:
        obj: SpectralField (inverse) or physical array (forward)
        direction: "fwd" or "inv"
        grid: Target grid for a forward transform
        sym: Symmetry class attached to the forward result

    Returns:
        SpectralField for "fwd", a fresh float64 array for "inv"

    Raises:
        DimensionMismatchError: If the array does not match the grid
    """
    direction = TransformDirection(direction)
    if direction is TransformDirection.FORWARD:
        if isinstance(obj, SpectralField):
            msg = "Forward transform expects a physical array"
            raise SpectralError(msg)
        if grid is None:
            msg = "Forward transform needs a grid"
            raise SpectralError(msg)
        return SpectralField.from_physical(grid, obj, sym)
    if not isinstance(obj, SpectralField):
        msg = "Inverse transform expects a SpectralField"
        raise SpectralError(msg)
    if grid is not None and grid != obj.grid:
        msg = f"Field grid {obj.grid} does not match requested grid {grid}"
        raise DimensionMismatchError(msg)
    return np.array(obj.physical(), copy=True)


def derivative(f: SpectralField, axis: Axis | str, order: int = 1) -> SpectralField:
    """Exact spectral derivative along one axis.

    Odd orders use wavenumbers with the Nyquist mode zeroed so the result stays
    real; odd-order z-derivatives flip the symmetry class.

    Raises:
        SpectralError: On a z-derivative of a 2-D field or an unsupported order
    """
    axis = Axis(axis)
    if axis.index >= f.grid.ndim:
        msg = f"Axis {axis.value} not available on a {f.grid.ndim}-D grid"
        raise SpectralError(msg)
    if order == 1:
        multiplier = 1j * f.grid.odd_wavenumbers[axis.index]
    elif order == 2:
        multiplier = -(f.grid.wavenumbers[axis.index] ** 2)
    else:
        msg = f"Derivative order must be 1 or 2, got {order}"
        raise SpectralError(msg)
    sym = f.sym.flipped() if axis is Axis.Z and order % 2 else f.sym
    return f.with_coeffs(f.coeffs * multiplier, sym)


def project_symmetry(f: SpectralField, cls: SymmetryClass | str) -> SpectralField:
    """Project onto the even or odd part in z (NONE returns the input unlabeled).

    The even and odd projections are complementary: their sum is the input,
    with the z-mean (kz = 0) content carried by the even part.
    """
    cls = SymmetryClass(cls)
    if cls is SymmetryClass.NONE:
        return f.with_coeffs(f.coeffs, SymmetryClass.NONE)
    if not isinstance(f.grid, Grid3):
        msg = "z-symmetry projection requires a 3-D grid"
        raise SpectralError(msg)
    reflected = f.coeffs[:, :, f.grid.z_reflection]
    sign = 1.0 if cls is SymmetryClass.EVEN else -1.0
    return f.with_coeffs(0.5 * (f.coeffs + sign * reflected), cls)


def symmetry_residual(f: SpectralField) -> float:
    """Largest coefficient deviation from the field's own symmetry class, relative."""
    if f.sym is SymmetryClass.NONE:
        return 0.0
    projected = project_symmetry(f, f.sym)
    scale = max(1.0, float(np.abs(f.coeffs).max()))
    return float(np.abs(f.coeffs - projected.coeffs).max()) / scale
