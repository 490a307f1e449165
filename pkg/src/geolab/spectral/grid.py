"""Periodic grids and z-symmetry classes.

Collocation points are x_i = i*L/N, i = 0..N-1, and coefficients are indexed by
integer wavenumbers in numpy FFT order (0, 1, ..., N/2-1, -N/2, ..., -1).
The z axis of a Grid3 spans one period Lz; grid point k sits at z = k*Lz/N3,
which is the same point as z - Lz, so the reflection z -> -z maps the grid onto
itself (index k -> -k mod N3).
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from geolab.shared.errors import GeolabError


class GridError(GeolabError, ValueError):
    """Invalid grid dimensions or lengths."""


class SymmetryClass(str, Enum):
    """Parity of a field under z -> -z."""

    EVEN = "even"
    ODD = "odd"
    NONE = "none"

    def flipped(self) -> "SymmetryClass":
        """Class of the z-derivative of a field in this class."""
        if self is SymmetryClass.EVEN:
            return SymmetryClass.ODD
        if self is SymmetryClass.ODD:
            return SymmetryClass.EVEN
        return SymmetryClass.NONE

    def times(self, other: "SymmetryClass") -> "SymmetryClass":
        """Class of a pointwise product."""
        if SymmetryClass.NONE in (self, other):
            return SymmetryClass.NONE
        return SymmetryClass.EVEN if self is other else SymmetryClass.ODD


def _validate(lengths: tuple[float, ...], sizes: tuple[int, ...]) -> None:
    for length in lengths:
        if not length > 0:
            msg = f"Grid lengths must be positive, got {lengths}"
            raise GridError(msg)
    for n in sizes:
        if n < 8 or n % 2:
            msg = f"Grid mode counts must be even and >= 8, got {sizes}"
            raise GridError(msg)


class _PeriodicGrid:
    """Wavenumber and mask machinery shared by Grid2 and Grid3."""

    @property
    def lengths(self) -> tuple[float, ...]:
        raise NotImplementedError

    @property
    def sizes(self) -> tuple[int, ...]:
        raise NotImplementedError

    @property
    def ndim(self) -> int:
        return len(self.sizes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.sizes

    @property
    def npoints(self) -> int:
        return int(np.prod(self.sizes))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(length / n for length, n in zip(self.lengths, self.sizes, strict=True))

    def _broadcast(self, axis: int, values: np.ndarray) -> np.ndarray:
        shape = [1] * self.ndim
        shape[axis] = values.size
        return values.reshape(shape)

    @cached_property
    def mode_numbers(self) -> tuple[np.ndarray, ...]:
        """Integer wavenumbers per axis, broadcastable to the grid shape."""
        return tuple(
            self._broadcast(axis, np.fft.fftfreq(n, d=1.0 / n).astype(np.int64))
            for axis, n in enumerate(self.sizes)
        )

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Angular wavenumbers 2*pi*m/L per axis, broadcastable."""
        return tuple(
            2.0 * np.pi / length * m.astype(float)
            for length, m in zip(self.lengths, self.mode_numbers, strict=True)
        )

    @cached_property
    def odd_wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Wavenumbers with the Nyquist mode zeroed, for odd-order derivatives."""
        return tuple(
            np.where(m == -(n // 2), 0.0, k)
            for k, m, n in zip(self.wavenumbers, self.mode_numbers, self.sizes, strict=True)
        )

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Boolean 2/3-rule mask: |m_i| <= (N_i - 1)//3 on every axis."""
        mask = np.ones(self.shape, dtype=bool)
        for m, n in zip(self.mode_numbers, self.sizes, strict=True):
            mask = mask & (np.abs(m) <= (n - 1) // 3)
        return mask

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Collocation coordinates x_i = i*L/N, full-shape arrays (ij indexing)."""
        axes = [np.arange(n) * (length / n) for length, n in zip(self.lengths, self.sizes, strict=True)]
        return tuple(np.meshgrid(*axes, indexing="ij"))


@dataclass(frozen=True)
class Grid3(_PeriodicGrid):
    """Triply periodic box M x (-Lz/2, Lz/2)."""

    L1: float
    L2: float
    Lz: float
    N1: int
    N2: int
    N3: int

    def __post_init__(self) -> None:
        _validate(self.lengths, self.sizes)

    @property
    def lengths(self) -> tuple[float, float, float]:
        return (self.L1, self.L2, self.Lz)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (self.N1, self.N2, self.N3)

    @property
    def half_height(self) -> float:
        return 0.5 * self.Lz

    @cached_property
    def z_reflection(self) -> np.ndarray:
        """Index permutation k -> -k mod N3 realizing z -> -z on coefficients or points."""
        return (-np.arange(self.N3)) % self.N3

    def z_centered(self) -> np.ndarray:
        """z coordinates wrapped into (-Lz/2, Lz/2], full-shape array."""
        z = self.coordinates()[2]
        return np.where(z > self.half_height, z - self.Lz, z)

    def horizontal(self) -> "Grid2":
        """The horizontal (x, y) grid."""
        return Grid2(L1=self.L1, L2=self.L2, N1=self.N1, N2=self.N2)


@dataclass(frozen=True)
class Grid2(_PeriodicGrid):
    """Doubly periodic box M."""

    L1: float
    L2: float
    N1: int
    N2: int

    def __post_init__(self) -> None:
        _validate(self.lengths, self.sizes)

    @property
    def lengths(self) -> tuple[float, float]:
        return (self.L1, self.L2)

    @property
    def sizes(self) -> tuple[int, int]:
        return (self.N1, self.N2)


Grid = Grid2 | Grid3
