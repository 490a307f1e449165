"""Unit tests for spectral operators."""

import numpy as np
import pytest

from geolab.spectral.field import Axis, SpectralField, derivative
from geolab.spectral.grid import Grid2, Grid3, SymmetryClass
from geolab.spectral.operators import (
    GaugeViolationError,
    InvalidNormError,
    NormKind,
    advection,
    barotropic_project,
    curl_h,
    dealiased_product,
    divergence_h,
    extend_plane,
    gradient_h,
    inner,
    leray_project,
    norm,
    poisson_aniso,
    tail_fraction,
    truncate,
    vector_norm,
    vertical_integral,
    z_mean_plane,
)
from tests.test_utils import TWO_PI, field_from, make_grid2, make_grid3


@pytest.mark.unit
class TestPoissonAniso:
    """Tests for the anisotropic Poisson solve."""

    @pytest.mark.parametrize("lambda_z", [0.5, 1.0, 4.0])
    def test_recovers_trig_polynomial(self, lambda_z: float) -> None:
        """Test that (Delta_H + lambda d_z^2) u = rhs is inverted exactly on 32^3."""
        grid = make_grid3(32, lz=TWO_PI, length=TWO_PI)
        u = field_from(
            grid, lambda x, y, z: np.sin(2 * x) * np.cos(y) + np.cos(3 * z) + np.sin(x + 2 * z)
        )
        rhs = (
            derivative(u, Axis.X, 2) + derivative(u, Axis.Y, 2) + lambda_z * derivative(u, Axis.Z, 2)
        )
        solved = poisson_aniso(rhs, lambda_z)
        assert np.abs(solved.physical() - u.physical()).max() < 1e-11

    def test_mean_is_gauged_to_zero(self, grid2: Grid2) -> None:
        """Test the zero-mean gauge of the solution."""
        rhs = field_from(grid2, lambda x, y: np.cos(x))
        assert abs(poisson_aniso(rhs, 0.0).mean) < 1e-15

    def test_rejects_mean_content(self, grid2: Grid2) -> None:
        """Test that a right-hand side with nonzero mean is a gauge violation."""
        rhs = field_from(grid2, lambda x, y: 1.0 + np.cos(x))
        with pytest.raises(GaugeViolationError):
            poisson_aniso(rhs, 1.0)

    def test_lambda_zero_kernel(self, grid3: Grid3) -> None:
        """Test that z-only content is in the kernel when lambda = 0."""
        rhs = field_from(grid3, lambda x, y, z: np.cos(np.pi * z))
        with pytest.raises(GaugeViolationError):
            poisson_aniso(rhs, 0.0)
        assert np.isfinite(poisson_aniso(rhs, 1.0).coeffs).all()

    def test_negative_lambda(self, grid3: Grid3) -> None:
        """Test that a negative vertical weight is refused."""
        with pytest.raises(ValueError):
            poisson_aniso(SpectralField.zeros(grid3), -1.0)


@pytest.mark.unit
class TestVerticalIntegral:
    """Tests for vertical antiderivatives."""

    def test_integral_of_cosine_from_bottom(self, grid3: Grid3) -> None:
        """Test integral_{-1}^z cos(pi z') dz' = sin(pi z)/pi, odd in z."""
        f = field_from(grid3, lambda x, y, z: np.cos(np.pi * z) * np.cos(TWO_PI * x), SymmetryClass.EVEN)
        result = vertical_integral(f, lower=-1.0)
        z = grid3.z_centered()
        x = grid3.coordinates()[0]
        assert result.sym is SymmetryClass.ODD
        assert np.abs(result.physical() - np.sin(np.pi * z) / np.pi * np.cos(TWO_PI * x)).max() < 1e-12

    def test_integral_of_odd_is_even(self, grid3: Grid3) -> None:
        """Test integral_{-1}^z sin(pi z') dz' = -(cos(pi z) + 1)/pi."""
        f = field_from(grid3, lambda x, y, z: np.sin(np.pi * z), SymmetryClass.ODD)
        result = vertical_integral(f, lower=-1.0)
        expected = -(np.cos(np.pi * grid3.z_centered()) + 1.0) / np.pi
        assert result.sym is SymmetryClass.EVEN
        assert np.abs(result.physical() - expected).max() < 1e-12

    def test_nonzero_mean_adds_linear_part(self, grid3: Grid3) -> None:
        """Test that a constant integrates to z - lower on the centered grid."""
        result = vertical_integral(SpectralField.constant(grid3, 2.0), lower=-1.0)
        assert np.allclose(result.physical(), 2.0 * (grid3.z_centered() + 1.0))

    def test_nyquist_plane_dropped(self, grid3: Grid3) -> None:
        """Test that pure Nyquist kz content integrates to zero and leaves other modes alone."""
        even = SymmetryClass.EVEN
        nyquist = field_from(grid3, lambda x, y, z: np.cos(8 * np.pi * z) * np.cos(TWO_PI * x), even)
        assert np.abs(nyquist.coeffs[:, :, 8]).max() > 0.1
        assert np.abs(vertical_integral(nyquist, lower=-1.0).physical()).max() < 1e-12

        smooth = field_from(grid3, lambda x, y, z: np.cos(np.pi * z) * np.cos(TWO_PI * x), even)
        mixed = vertical_integral(smooth + nyquist, lower=-1.0)
        assert np.abs(mixed.physical() - vertical_integral(smooth, lower=-1.0).physical()).max() < 1e-12

    def test_needs_3d(self, grid2: Grid2) -> None:
        """Test that vertical integrals are refused on 2-D grids."""
        with pytest.raises(ValueError):
            vertical_integral(SpectralField.zeros(grid2))


@pytest.mark.unit
class TestDealiasedProduct:
    """Tests for 2/3-rule products."""

    def test_resolved_product_is_exact(self, grid2: Grid2) -> None:
        """Test sin(x) cos(2y) * cos(x) within the band equals the pointwise product."""
        a = field_from(grid2, lambda x, y: np.sin(x) * np.cos(2 * y))
        b = field_from(grid2, lambda x, y: np.cos(x))
        product = dealiased_product(a, b)
        assert np.allclose(product.physical(), a.physical() * b.physical(), atol=1e-13)

    def test_modes_outside_band_removed(self, grid2: Grid2) -> None:
        """Test that inputs above the 2/3 band do not alias into the result."""
        a = field_from(grid2, lambda x, y: np.cos(7 * x))
        raw = dealiased_product(a, a, dealias=False)
        clean = dealiased_product(a, a)
        assert np.abs(raw.coeffs).max() > 0.1
        assert np.abs(clean.coeffs).max() < 1e-15

    def test_output_truncated(self, grid2: Grid2) -> None:
        """Test that products of in-band modes are truncated to the band."""
        a = field_from(grid2, lambda x, y: np.cos(4 * x))
        product = dealiased_product(a, a)
        assert np.abs(product.coeffs[~grid2.dealias_mask]).max() == 0.0
        assert product.mean == pytest.approx(0.5)

    def test_truncate_keeps_band(self, grid2: Grid2) -> None:
        """Test that truncate drops cos(7x), keeps cos(2x) and is idempotent."""
        f = field_from(grid2, lambda x, y: np.cos(2 * x) + np.cos(7 * x))
        kept = truncate(f)
        x = grid2.coordinates()[0]
        assert np.allclose(kept.physical(), np.cos(2 * x), atol=1e-13)
        assert np.array_equal(truncate(kept).coeffs, kept.coeffs)

    def test_symmetry_of_product(self, grid3: Grid3) -> None:
        """Test that the parity of a product follows the factors."""
        odd = field_from(grid3, lambda x, y, z: np.sin(np.pi * z), SymmetryClass.ODD)
        assert dealiased_product(odd, odd).sym is SymmetryClass.EVEN

    def test_advection_of_linear_profile(self, grid2: Grid2) -> None:
        """Test u.grad s for constant u and s = sin(x): u1 cos(x)."""
        u = (SpectralField.constant(grid2, 0.5), SpectralField.zeros(grid2))
        s = field_from(grid2, lambda x, y: np.sin(x))
        result = advection(u, s)
        assert np.allclose(result.physical(), 0.5 * np.cos(grid2.coordinates()[0]), atol=1e-13)


@pytest.mark.unit
class TestHorizontalCalculus:
    """Tests for gradient_h, divergence_h and curl_h."""

    def test_gradient(self, grid2: Grid2) -> None:
        """Test the gradient of sin(x) cos(2y)."""
        f = field_from(grid2, lambda x, y: np.sin(x) * np.cos(2 * y))
        gx, gy = gradient_h(f)
        x, y = grid2.coordinates()
        assert np.allclose(gx.physical(), np.cos(x) * np.cos(2 * y), atol=1e-12)
        assert np.allclose(gy.physical(), -2 * np.sin(x) * np.sin(2 * y), atol=1e-12)

    def test_curl_of_gradient_vanishes(self, grid2: Grid2) -> None:
        """Test that a gradient has zero curl and divergence equal to the Laplacian."""
        f = field_from(grid2, lambda x, y: np.sin(x) * np.cos(2 * y))
        gx, gy = gradient_h(f)
        assert np.abs(curl_h(gx, gy).physical()).max() < 1e-12
        assert np.allclose(divergence_h(gx, gy).physical(), -5 * f.physical(), atol=1e-12)


@pytest.mark.unit
class TestNorms:
    """Tests for norms and inner products."""

    @pytest.fixture
    def wave(self, grid3: Grid3) -> SpectralField:
        """sin(2 pi x) on the unit box with Lz = 2 (volume 2)."""
        return field_from(grid3, lambda x, y, z: np.sin(TWO_PI * x))

    def test_l2(self, wave: SpectralField) -> None:
        """Test ||sin(2 pi x)||_2 = sqrt(vol/2) = 1."""
        assert norm(wave) == pytest.approx(1.0)
        assert inner(wave, wave) == pytest.approx(1.0)

    def test_h1_h2(self, wave: SpectralField) -> None:
        """Test H1^2 = L2^2 + |k|^2 L2^2 and H2^2 adds |k|^4."""
        k2 = TWO_PI**2
        assert norm(wave, NormKind.H1) == pytest.approx(np.sqrt(1.0 + k2))
        assert norm(wave, "H2") == pytest.approx(np.sqrt(1.0 + k2 + k2**2))

    def test_linf_and_lq(self, wave: SpectralField) -> None:
        """Test Linf = 1 and L2 = Lq at q = 2."""
        assert norm(wave, NormKind.LINF) == pytest.approx(1.0)
        assert norm(wave, NormKind.LQ, q=2) == pytest.approx(1.0)
        assert norm(wave, NormKind.LQ, q=64) <= 2.0 ** (1 / 64) + 1e-12

    @pytest.mark.parametrize(("kind", "q"), [("L3", None), ("Lq", None), ("Lq", 1.0), ("Lq", np.inf)])
    def test_invalid(self, wave: SpectralField, kind: str, q: float | None) -> None:
        """Test unknown kinds and exponents outside [2, inf)."""
        with pytest.raises(InvalidNormError):
            norm(wave, kind, q)

    def test_vector_norm(self, grid2: Grid2) -> None:
        """Test that vector Linf uses the pointwise Euclidean magnitude."""
        a = SpectralField.constant(grid2, 3.0)
        b = SpectralField.constant(grid2, 4.0)
        assert vector_norm((a, b), NormKind.LINF) == pytest.approx(5.0)
        assert vector_norm((a, b)) == pytest.approx(5.0 * TWO_PI)

    def test_tail_fraction(self, grid2: Grid2) -> None:
        """Test the spectral share outside the band."""
        smooth = field_from(grid2, lambda x, y: np.cos(x))
        rough = field_from(grid2, lambda x, y: np.cos(7 * x))
        assert tail_fraction([smooth]) == 0.0
        assert tail_fraction([smooth, rough]) == pytest.approx(0.5)
        assert tail_fraction([SpectralField.zeros(grid2)]) == 0.0


@pytest.mark.unit
class TestProjections:
    """Tests for Leray and barotropic projections."""

    def test_leray_divergence_free_and_idempotent(self) -> None:
        """Test the projected field is solenoidal and P(P u) = P u."""
        grid = make_grid2(16)
        rng = np.random.default_rng(4)
        u = tuple(SpectralField.from_physical(grid, rng.standard_normal(grid.shape)) for _ in range(2))
        p1, p2 = leray_project(u)
        assert np.abs(divergence_h(p1, p2).coeffs).max() < 1e-14
        q1, q2 = leray_project((p1, p2))
        assert np.allclose(q1.coeffs, p1.coeffs)
        assert np.allclose(q2.coeffs, p2.coeffs)

    def test_leray_removes_gradients(self, grid2: Grid2) -> None:
        """Test that gradient fields project to zero."""
        phi = field_from(grid2, lambda x, y: np.sin(x) * np.cos(2 * y))
        p1, p2 = leray_project((derivative(phi, Axis.X), derivative(phi, Axis.Y)))
        assert np.abs(p1.coeffs).max() < 1e-14
        assert np.abs(p2.coeffs).max() < 1e-14

    def test_leray_keeps_curl(self, grid2: Grid2) -> None:
        """Test that the curl is unchanged by the projection."""
        rng = np.random.default_rng(5)
        u = tuple(SpectralField.from_physical(grid2, rng.standard_normal(grid2.shape)) for _ in range(2))
        p = leray_project(u)
        assert np.allclose(curl_h(*p).coeffs, curl_h(*u).coeffs)

    def test_barotropic_projection(self, grid3: Grid3) -> None:
        """Test that the column mean becomes solenoidal and baroclinic parts are untouched."""
        rng = np.random.default_rng(6)
        v = tuple(SpectralField.from_physical(grid3, rng.standard_normal(grid3.shape)) for _ in range(2))
        (p1, p2), potential = barotropic_project(v)
        column = divergence_h(z_mean_plane(p1), z_mean_plane(p2))
        assert np.abs(column.coeffs).max() < 1e-14
        assert np.allclose(p1.coeffs[:, :, 1:], v[0].coeffs[:, :, 1:])
        assert isinstance(potential.grid, Grid2)

    def test_leray_rejects_3d(self, grid3: Grid3) -> None:
        """Test that the 2-D projection refuses 3-D fields."""
        with pytest.raises(ValueError):
            leray_project((SpectralField.zeros(grid3), SpectralField.zeros(grid3)))

    def test_plane_round_trip(self, grid3: Grid3) -> None:
        """Test that extending a plane and averaging it back is the identity."""
        plane = field_from(grid3.horizontal(), lambda x, y: np.cos(TWO_PI * y))
        extended = extend_plane(plane, grid3)
        assert extended.sym is SymmetryClass.EVEN
        assert np.allclose(z_mean_plane(extended).coeffs, plane.coeffs)
