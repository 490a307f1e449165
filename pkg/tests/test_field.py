"""Unit tests for spectral fields, transforms, derivatives and symmetry projections."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

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
from geolab.spectral.grid import Grid2, Grid3, SymmetryClass
from tests.test_utils import TWO_PI, field_from, make_grid2, make_grid3

SPECTRAL_TOL = 1e-11


@pytest.mark.unit
class TestSpectralField:
    """Tests for SpectralField construction and arithmetic."""

    def test_from_physical_keeps_values(self, grid2: Grid2) -> None:
        """Test that a field built from values returns exactly those values."""
        values = np.random.default_rng(0).standard_normal(grid2.shape)
        f = SpectralField.from_physical(grid2, values)
        assert np.array_equal(f.physical(), values)

    def test_normalized_coefficients(self, grid2: Grid2) -> None:
        """Test that coefficient 0 is the mean and Parseval holds without volume factors."""
        values = 3.0 + np.cos(grid2.coordinates()[0])
        f = SpectralField.from_physical(grid2, values)
        assert f.mean == pytest.approx(3.0)
        assert np.sum(np.abs(f.coeffs) ** 2) == pytest.approx(np.mean(values**2))

    def test_shape_mismatch(self, grid2: Grid2) -> None:
        """Test that arrays of the wrong shape are rejected."""
        with pytest.raises(DimensionMismatchError):
            SpectralField.from_physical(grid2, np.zeros((8, 8)))

    def test_symmetry_needs_3d(self, grid2: Grid2) -> None:
        """Test that z-symmetry labels are rejected on 2-D grids."""
        with pytest.raises(SpectralError):
            SpectralField.zeros(grid2, SymmetryClass.EVEN)

    def test_immutable(self, grid2: Grid2) -> None:
        """Test that coefficients and cached values are read-only."""
        f = SpectralField.from_physical(grid2, np.ones(grid2.shape))
        with pytest.raises(ValueError):
            f.coeffs[0, 0] = 2.0
        with pytest.raises(ValueError):
            f.physical()[0, 0] = 2.0

    def test_arithmetic(self, grid3: Grid3) -> None:
        """Test linear combinations and symmetry bookkeeping."""
        even = field_from(grid3, lambda x, y, z: np.cos(np.pi * z), SymmetryClass.EVEN)
        odd = field_from(grid3, lambda x, y, z: np.sin(np.pi * z), SymmetryClass.ODD)
        assert (even + even).sym is SymmetryClass.EVEN
        assert (even - odd).sym is SymmetryClass.NONE
        assert (2.0 * odd).sym is SymmetryClass.ODD
        assert (odd + 1.0).sym is SymmetryClass.NONE
        assert np.allclose((even / 2.0 + 1.0).physical(), 0.5 * even.physical() + 1.0)
        assert np.allclose((1.0 - odd).physical(), 1.0 - odd.physical())

    def test_field_product_rejected(self, grid2: Grid2) -> None:
        """Test that multiplying two fields directly is refused."""
        f = SpectralField.zeros(grid2)
        with pytest.raises(SpectralError):
            f * f  # noqa: B018

    def test_grid_mismatch(self) -> None:
        """Test combining fields on different grids."""
        with pytest.raises(DimensionMismatchError):
            SpectralField.zeros(make_grid2(8)) + SpectralField.zeros(make_grid2(16))


@pytest.mark.unit
class TestTransform:
    """Tests for forward and inverse transforms."""

    def test_round_trip(self, grid3: Grid3) -> None:
        """Test inverse(forward(x)) reproduces x to round-off."""
        values = np.random.default_rng(1).standard_normal(grid3.shape)
        f = transform(values, TransformDirection.FORWARD, grid3)
        fresh = SpectralField(grid3, f.coeffs)
        back = transform(fresh, "inv")
        assert np.allclose(back, values, atol=1e-13)

    def test_inverse_returns_copy(self, grid2: Grid2) -> None:
        """Test that the inverse transform hands out a writable copy."""
        f = SpectralField.from_physical(grid2, np.ones(grid2.shape))
        out = transform(f, "inv")
        out[0, 0] = 5.0
        assert f.physical()[0, 0] == 1.0

    def test_direction_type_errors(self, grid2: Grid2) -> None:
        """Test misuse of transform directions."""
        with pytest.raises(SpectralError):
            transform(np.zeros(grid2.shape), "fwd")
        with pytest.raises(SpectralError):
            transform(SpectralField.zeros(grid2), "fwd", grid2)
        with pytest.raises(SpectralError):
            transform(np.zeros(grid2.shape), "inv")
        with pytest.raises(DimensionMismatchError):
            transform(SpectralField.zeros(grid2), "inv", make_grid2(8))

    @settings(max_examples=25, deadline=None)
    @given(
        mx=st.integers(min_value=-7, max_value=7),
        my=st.integers(min_value=-7, max_value=7),
        phase=st.floats(min_value=0.0, max_value=6.28),
    )
    def test_single_mode_has_one_coefficient_pair(self, mx: int, my: int, phase: float) -> None:
        """Test that a resolved Fourier mode occupies only +-(mx, my)."""
        grid = make_grid2(16)
        f = field_from(grid, lambda x, y: np.cos(mx * x + my * y + phase))
        magnitude = np.abs(f.coeffs)
        big = magnitude > 1e-12
        expected = {(mx % 16, my % 16), (-mx % 16, -my % 16)}
        assert {tuple(int(i) for i in idx) for idx in zip(*np.nonzero(big), strict=True)} <= expected


@pytest.mark.unit
class TestDerivative:
    """Tests for exact spectral derivatives."""

    def test_first_and_second_x_derivative(self) -> None:
        """Test d/dx sin(3x) = 3 cos(3x) and d2/dx2 = -9 sin(3x) on 32^3."""
        grid = make_grid3(32, lz=TWO_PI, length=TWO_PI)
        f = field_from(grid, lambda x, y, z: np.sin(3 * x))
        first = derivative(f, Axis.X)
        second = derivative(f, "x", order=2)
        x = grid.coordinates()[0]
        assert np.abs(first.physical() - 3 * np.cos(3 * x)).max() < SPECTRAL_TOL * 3
        assert np.abs(second.physical() + 9 * np.sin(3 * x)).max() < SPECTRAL_TOL * 9

    def test_z_derivative_flips_symmetry(self, grid3: Grid3) -> None:
        """Test that odd-order z-derivatives flip the parity label."""
        even = field_from(grid3, lambda x, y, z: np.cos(np.pi * z), SymmetryClass.EVEN)
        dz = derivative(even, Axis.Z)
        assert dz.sym is SymmetryClass.ODD
        assert np.allclose(dz.physical(), -np.pi * np.sin(np.pi * grid3.z_centered()), atol=1e-11)
        assert derivative(even, Axis.Z, order=2).sym is SymmetryClass.EVEN

    def test_z_derivative_on_2d(self, grid2: Grid2) -> None:
        """Test that z is not available on 2-D grids."""
        with pytest.raises(SpectralError):
            derivative(SpectralField.zeros(grid2), Axis.Z)

    def test_unsupported_order(self, grid2: Grid2) -> None:
        """Test derivative orders beyond 2."""
        with pytest.raises(SpectralError):
            derivative(SpectralField.zeros(grid2), Axis.X, order=3)

    def test_nyquist_mode_first_derivative_vanishes(self, grid2: Grid2) -> None:
        """Test that the first derivative of the Nyquist mode is zero (stays real)."""
        f = field_from(grid2, lambda x, y: np.cos(8 * x))
        assert np.abs(derivative(f, Axis.X).coeffs).max() == 0.0


@pytest.mark.unit
class TestSymmetry:
    """Tests for z-symmetry projections."""

    def test_even_plus_odd_is_identity(self) -> None:
        """Test that the even and odd parts add up to the input."""
        grid = make_grid3(8)
        values = np.random.default_rng(2).standard_normal(grid.shape)
        f = SpectralField.from_physical(grid, values)
        even = project_symmetry(f, SymmetryClass.EVEN)
        odd = project_symmetry(f, "odd")
        assert np.allclose((even + odd).physical(), values, atol=1e-13)
        assert symmetry_residual(even) < 1e-14
        assert symmetry_residual(odd) < 1e-14

    def test_projection_idempotent(self) -> None:
        """Test P(P f) = P f."""
        grid = make_grid3(8)
        f = SpectralField.from_physical(grid, np.random.default_rng(3).standard_normal(grid.shape))
        once = project_symmetry(f, SymmetryClass.ODD)
        twice = project_symmetry(once, SymmetryClass.ODD)
        assert np.allclose(once.coeffs, twice.coeffs)

    def test_odd_part_vanishes_at_mid_plane(self, grid3: Grid3) -> None:
        """Test that odd fields vanish at z = 0."""
        f = field_from(grid3, lambda x, y, z: np.exp(z) * np.cos(TWO_PI * x))
        odd = project_symmetry(f, SymmetryClass.ODD)
        assert np.abs(odd.physical()[:, :, 0]).max() < 1e-13

    def test_residual_of_mislabelled_field(self, grid3: Grid3) -> None:
        """Test that a field labelled even but carrying odd content reports a residual."""
        f = field_from(grid3, lambda x, y, z: np.sin(np.pi * z), SymmetryClass.EVEN)
        assert symmetry_residual(f) > 0.1

    def test_projection_needs_3d(self, grid2: Grid2) -> None:
        """Test that projections are refused on 2-D grids."""
        with pytest.raises(SpectralError):
            project_symmetry(SpectralField.zeros(grid2), SymmetryClass.EVEN)
