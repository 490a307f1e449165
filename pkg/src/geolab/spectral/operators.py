"""Spectral operators: elliptic solves, vertical integrals, dealiased products, norms, projections.

First derivatives, divergences and projections share the Nyquist-free wavenumbers
of the grid, so a field returned by a projection has a discrete divergence that
vanishes mode by mode.
"""

from collections.abc import Sequence
from enum import Enum

import numpy as np

from geolab.shared.logging import get_logger
from geolab.spectral.field import (
    Axis,
    DimensionMismatchError,
    SpectralError,
    SpectralField,
    derivative,
    forward_fft,
    inverse_fft,
    project_symmetry,
)
from geolab.spectral.grid import Grid, Grid2, Grid3, SymmetryClass

logger = get_logger(__name__)

GAUGE_TOLERANCE = 1e-10


class GaugeViolationError(SpectralError):
    """Right-hand side of an elliptic solve has content in the operator's kernel."""


class InvalidNormError(SpectralError):
    """Unknown norm kind or out-of-range exponent."""


class NormKind(str, Enum):
    """Supported norms."""

    L2 = "L2"
    LQ = "Lq"
    LINF = "Linf"
    H1 = "H1"
    H2 = "H2"


Vector = tuple[SpectralField, ...]


# -- symbols ---------------------------------------------------------------


def horizontal_wavenumber_sq(grid: Grid) -> np.ndarray:
    k = grid.wavenumbers
    return k[0] ** 2 + k[1] ** 2


def laplacian_symbol(grid: Grid, horizontal: float = 1.0, vertical: float = 1.0) -> np.ndarray:
    """Nonnegative symbol of -(horizontal*Delta_H + vertical*d_z^2)."""
    symbol = horizontal * horizontal_wavenumber_sq(grid)
    if isinstance(grid, Grid3):
        symbol = symbol + vertical * grid.wavenumbers[2] ** 2
    return np.broadcast_to(symbol, grid.shape)


def apply_symbol(
    f: SpectralField, symbol: np.ndarray, sym: SymmetryClass | None = None
) -> SpectralField:
    return f.with_coeffs(f.coeffs * symbol, sym)


# -- elliptic solves -------------------------------------------------------


def poisson_aniso(rhs: SpectralField, lambda_z: float) -> SpectralField:
    """Solve (Delta_H + lambda_z d_z^2) u = rhs with a zero-mean gauge.

    Args:
        rhs: Right-hand side; must vanish on the kernel of the operator
            (the mean mode, and every kz mode with zero horizontal wavenumber
            when lambda_z = 0)
        lambda_z: Vertical weight, >= 0 (ignored on 2-D grids)

    Returns:
        Solution with zero content on the kernel

    Raises:
        GaugeViolationError: If rhs has kernel content beyond tolerance
    """
    if lambda_z < 0:
        msg = f"lambda_z must be nonnegative, got {lambda_z}"
        raise SpectralError(msg)
    symbol = horizontal_wavenumber_sq(rhs.grid)
    if isinstance(rhs.grid, Grid3):
        symbol = symbol + lambda_z * rhs.grid.wavenumbers[2] ** 2
    symbol = np.broadcast_to(symbol, rhs.grid.shape)
    kernel = symbol == 0.0
    scale = max(1.0, float(np.abs(rhs.coeffs).max()))
    leak = float(np.abs(rhs.coeffs[kernel]).max()) if kernel.any() else 0.0
    if leak > GAUGE_TOLERANCE * scale:
        msg = f"Right-hand side has kernel content {leak:.3e}; zero-mean gauge violated"
        raise GaugeViolationError(msg)
    safe = np.where(kernel, 1.0, symbol)
    coeffs = np.where(kernel, 0.0, -rhs.coeffs / safe)
    return rhs.with_coeffs(coeffs)


def vertical_integral(f: SpectralField, lower: float = 0.0) -> SpectralField:
    """F(x, y, z) = integral of f from z' = lower to z.

    kz != 0 modes are antidifferentiated exactly; the constant of integration
    lands in the kz = 0 plane. A nonzero z-mean contributes (z - lower) times
    that mean, which is not periodic and is sampled on the centered grid.

    The Nyquist kz plane is dropped: its sine partner vanishes at every grid
    point, so it has no antiderivative on the grid. Dealiased fields carry no
    content there; anything found is logged at debug level.

    Args:
        f: Field on a 3-D grid
        lower: Lower limit, usually -h (bottom) or 0 (mid-plane)

    Returns:
        Antiderivative field
    """
    grid = f.grid
    if not isinstance(grid, Grid3):
        msg = "vertical_integral requires a 3-D grid"
        raise SpectralError(msg)
    kz = grid.odd_wavenumbers[2]
    nyquist = f.coeffs[:, :, grid.N3 // 2] if grid.N3 % 2 == 0 else None
    if nyquist is not None and float(np.abs(nyquist).max()) > 0.0:
        logger.debug("content=<%.3e> | dropping the nyquist kz plane", float(np.abs(nyquist).max()))
    # Nyquist and kz = 0 both have odd_wavenumbers == 0
    nonzero = np.broadcast_to(kz != 0.0, grid.shape)
    anti = np.zeros(grid.shape, dtype=np.complex128)
    anti[nonzero] = f.coeffs[nonzero] / (1j * np.broadcast_to(kz, grid.shape)[nonzero])
    at_lower = np.sum(anti * np.exp(1j * kz * lower), axis=2)
    anti[:, :, 0] = -at_lower

    mean_plane = f.coeffs[:, :, 0]
    scale = max(1.0, float(np.abs(f.coeffs).max()))
    reflection_point = np.isclose(abs(lower), grid.half_height) or lower == 0.0
    if float(np.abs(mean_plane).max()) > GAUGE_TOLERANCE * scale:
        logger.debug("lower=<%s> | nonzero z-mean, adding linear-in-z contribution", lower)
        base = inverse_fft(anti)
        column_mean = inverse_fft(mean_plane)[:, :, None]
        values = base + column_mean * (grid.z_centered() - lower)
        return SpectralField.from_physical(grid, values)

    result = SpectralField(grid, anti)
    if f.sym is SymmetryClass.ODD:
        return project_symmetry(result, SymmetryClass.EVEN)
    if f.sym is SymmetryClass.EVEN and reflection_point:
        return project_symmetry(result, SymmetryClass.ODD)
    return result


# -- products --------------------------------------------------------------


def truncate(f: SpectralField) -> SpectralField:
    """Zero every mode outside the 2/3 band."""
    return f.with_coeffs(f.coeffs * f.grid.dealias_mask)


def _dealiased_values(f: SpectralField) -> np.ndarray:
    return inverse_fft(f.coeffs * f.grid.dealias_mask)


def dealiased_product(a: SpectralField, b: SpectralField, dealias: bool = True) -> SpectralField:
    """Pointwise product with the 2/3 rule applied to inputs and output.

    Args:
        a: First factor
        b: Second factor (same grid)
        dealias: Disable to get the raw aliased collocation product

    Raises:
        DimensionMismatchError: If the grids differ
    """
    a.check_compatible(b)
    sym = a.sym.times(b.sym)
    if not dealias:
        return SpectralField(a.grid, forward_fft(a.physical() * b.physical()), sym)
    mask = a.grid.dealias_mask
    coeffs = forward_fft(_dealiased_values(a) * _dealiased_values(b)) * mask
    return SpectralField(a.grid, coeffs, sym)


def advection_many(velocity: Vector, scalars: Sequence[SpectralField]) -> list[SpectralField]:
    """sum_i u_i d_i s for each scalar s, every product dealiased.

    The velocity has 2 components (horizontal transport) or 3 (including w).
    """
    if not scalars:
        return []
    grid = velocity[0].grid
    for component in (*velocity, *scalars):
        if component.grid != grid:
            msg = "advection operands must share one grid"
            raise DimensionMismatchError(msg)
    axes = (Axis.X, Axis.Y, Axis.Z)[: len(velocity)]
    u_values = [_dealiased_values(u) for u in velocity]
    mask = grid.dealias_mask
    out = []
    for s in scalars:
        total = np.zeros(grid.shape)
        classes = set()
        for u, u_val, axis in zip(velocity, u_values, axes, strict=True):
            ds = derivative(s, axis)
            total += u_val * _dealiased_values(ds)
            classes.add(u.sym.times(ds.sym))
        sym = classes.pop() if len(classes) == 1 else SymmetryClass.NONE
        out.append(SpectralField(grid, forward_fft(total) * mask, sym))
    return out


def advection(velocity: Vector, scalar: SpectralField) -> SpectralField:
    return advection_many(velocity, [scalar])[0]


# -- differential helpers --------------------------------------------------


def gradient_h(f: SpectralField) -> tuple[SpectralField, SpectralField]:
    return derivative(f, Axis.X), derivative(f, Axis.Y)


def divergence_h(vx: SpectralField, vy: SpectralField) -> SpectralField:
    return derivative(vx, Axis.X) + derivative(vy, Axis.Y)


def curl_h(vx: SpectralField, vy: SpectralField) -> SpectralField:
    """Horizontal curl grad_H^perp . v = -d_y v1 + d_x v2."""
    return derivative(vy, Axis.X) - derivative(vx, Axis.Y)


def z_mean_plane(f: SpectralField) -> SpectralField:
    """Vertical average as a field on the horizontal grid."""
    if not isinstance(f.grid, Grid3):
        msg = "z_mean_plane requires a 3-D grid"
        raise SpectralError(msg)
    return SpectralField(f.grid.horizontal(), np.array(f.coeffs[:, :, 0]))


def extend_plane(f2: SpectralField, grid: Grid3) -> SpectralField:
    """z-independent 3-D field carrying a 2-D field."""
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    coeffs[:, :, 0] = f2.coeffs
    return SpectralField(grid, coeffs, SymmetryClass.EVEN)


# -- projections -----------------------------------------------------------


def _leray_coeffs(
    c1: np.ndarray, c2: np.ndarray, k1: np.ndarray, k2: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Remove the gradient part; also returns the potential phi with u = P u + grad phi."""
    ksq = k1**2 + k2**2
    kernel = ksq == 0.0
    div = 1j * (k1 * c1 + k2 * c2)
    phi = np.where(kernel, 0.0, -div / np.where(kernel, 1.0, ksq))
    return c1 - 1j * k1 * phi, c2 - 1j * k2 * phi, phi


def leray_project(u: tuple[SpectralField, SpectralField]) -> tuple[SpectralField, SpectralField]:
    """Orthogonal projection of a 2-D vector field onto divergence-free fields."""
    u1, u2 = u
    u1.check_compatible(u2)
    if not isinstance(u1.grid, Grid2):
        msg = "leray_project expects a 2-D field; use barotropic_project on 3-D grids"
        raise SpectralError(msg)
    k1, k2 = u1.grid.odd_wavenumbers
    c1, c2, _ = _leray_coeffs(u1.coeffs, u2.coeffs, k1, k2)
    return u1.with_coeffs(c1), u2.with_coeffs(c2)


def barotropic_project(
    v: tuple[SpectralField, SpectralField],
) -> tuple[tuple[SpectralField, SpectralField], SpectralField]:
    """Leray-project the z-mean of a 3-D horizontal velocity.

    Returns:
        Projected velocity and the 2-D potential phi removed from the z-mean
        (v_bar = P v_bar + grad_H phi)
    """
    v1, v2 = v
    v1.check_compatible(v2)
    grid = v1.grid
    if not isinstance(grid, Grid3):
        msg = "barotropic_project requires a 3-D grid"
        raise SpectralError(msg)
    k1 = grid.odd_wavenumbers[0][:, :, 0]
    k2 = grid.odd_wavenumbers[1][:, :, 0]
    c1 = np.array(v1.coeffs)
    c2 = np.array(v2.coeffs)
    p1, p2, phi = _leray_coeffs(c1[:, :, 0], c2[:, :, 0], k1, k2)
    c1[:, :, 0] = p1
    c2[:, :, 0] = p2
    potential = SpectralField(grid.horizontal(), phi)
    return (v1.with_coeffs(c1), v2.with_coeffs(c2)), potential


# -- norms and inner products ----------------------------------------------


def inner(a: SpectralField, b: SpectralField) -> float:
    """L2 inner product over the box, via Parseval."""
    a.check_compatible(b)
    return a.grid.volume * float(np.real(np.vdot(b.coeffs, a.coeffs)))


def symbol_energy(f: SpectralField, symbol: np.ndarray) -> float:
    """sum over modes of volume * symbol * |c|^2 (e.g. ||grad f||^2 for symbol |k|^2)."""
    return f.grid.volume * float(np.sum(symbol * np.abs(f.coeffs) ** 2))


def norm(f: SpectralField, kind: NormKind | str = NormKind.L2, q: float | None = None) -> float:
    """Norm of a scalar field.

    L2/H1/H2 are Parseval sums with H1^2 = ||f||^2 + ||grad f||^2 and
    H2^2 = H1^2 + ||D^2 f||^2 (all mixed second derivatives, i.e. |k|^4);
    Lq and Linf are collocation quadratures.

    Raises:
        InvalidNormError: Unknown kind, missing q, or q outside [2, inf)
    """
    try:
        kind = NormKind(kind)
    except ValueError as e:
        msg = f"Unknown norm kind {kind!r}"
        raise InvalidNormError(msg) from e
    grid = f.grid
    power = np.abs(f.coeffs) ** 2
    if kind is NormKind.L2:
        return float(np.sqrt(grid.volume * power.sum()))
    if kind is NormKind.LINF:
        return float(np.abs(f.physical()).max())
    if kind is NormKind.LQ:
        return _lq(np.abs(f.physical()), grid.volume, q)
    ksq = laplacian_symbol(grid)
    total = power.sum() + (ksq * power).sum()
    if kind is NormKind.H2:
        total += (ksq**2 * power).sum()
    return float(np.sqrt(grid.volume * total))


def _lq(magnitude: np.ndarray, volume: float, q: float | None) -> float:
    if q is None or not np.isfinite(q) or q < 2:
        msg = f"Lq norm needs 2 <= q < inf, got {q}"
        raise InvalidNormError(msg)
    peak = float(magnitude.max())
    if peak == 0.0:
        return 0.0
    return peak * float((volume * np.mean((magnitude / peak) ** q)) ** (1.0 / q))


def vector_norm(
    components: Sequence[SpectralField], kind: NormKind | str = NormKind.L2, q: float | None = None
) -> float:
    """Norm of a vector field; Lq/Linf use the pointwise Euclidean magnitude."""
    kind = NormKind(kind)
    if kind in (NormKind.LQ, NormKind.LINF):
        magnitude = np.sqrt(sum(c.physical() ** 2 for c in components))
        if kind is NormKind.LINF:
            return float(magnitude.max())
        return _lq(magnitude, components[0].grid.volume, q)
    return float(np.sqrt(sum(norm(c, kind) ** 2 for c in components)))


def tail_fraction(components: Sequence[SpectralField]) -> float:
    """Share of the spectral energy outside the 2/3 band (0 for a zero field)."""
    total = 0.0
    tail = 0.0
    for f in components:
        power = np.abs(f.coeffs) ** 2
        total += float(power.sum())
        tail += float(power[~f.grid.dealias_mask].sum())
    return tail / total if total > 0 else 0.0
