"""Tests for the moist tropical atmosphere solver."""

import numpy as np
import pytest

from geolab.shared.errors import ConfigError
from geolab.solvers.integrators import PreconditionError
from geolab.solvers.tam import (
    TAMConfig,
    TAMState,
    TAMSolver,
    _transport,
    from_equivalent,
    precipitation,
    reconstruct_baroclinic,
    tam_step_relaxed,
    to_equivalent,
)
from geolab.spectral.field import SpectralField
from geolab.spectral.grid import Grid2
from geolab.spectral.operators import divergence_h
from tests.test_utils import field_from, make_grid2, max_abs_diff, tam_solver


def _rest(solver: TAMSolver, Te: float = 0.0, qe: float = -0.5) -> TAMState:
    grid = solver.cfg.grid
    zeros = SpectralField.zeros(grid)
    return solver.initial_state(
        (zeros, zeros), (zeros, zeros), SpectralField.constant(grid, Te), SpectralField.constant(grid, qe)
    )


@pytest.mark.unit
class TestEquivalentVariables:
    """Tests for the (theta, q) <-> (T_e, q_e) map."""

    def test_inverse(self) -> None:
        """Test that from_equivalent undoes to_equivalent."""
        rng = np.random.default_rng(7)
        theta = rng.standard_normal(50)
        q = rng.standard_normal(50)
        Te, qe = to_equivalent(theta, q, 0.7, 1.3)
        theta_back, q_back = from_equivalent(Te, qe, 0.7, 1.3)
        assert np.abs(theta_back - theta).max() < 1e-14
        assert np.abs(q_back - q).max() < 1e-14

    def test_scalar_values(self) -> None:
        """Test T_e = q + theta and q_e = q - alpha theta - qhat."""
        assert to_equivalent(2.0, 3.0, 1.0, 1.0) == (5.0, 0.0)

    def test_singular_alpha(self) -> None:
        """Test that alpha <= -1 is refused."""
        with pytest.raises(ConfigError) as exc:
            from_equivalent(1.0, 1.0, -1.0, 1.0)
        assert exc.value.constraint == "alpha > -1"


@pytest.mark.unit
class TestPrecipitation:
    """Tests for the precipitation term."""

    def test_zero_where_undersaturated(self, grid2: Grid2) -> None:
        """Test that P vanishes exactly wherever q_e <= 0."""
        qe = field_from(grid2, lambda x, y: np.sin(x) * np.cos(y))
        rate, source = precipitation(qe, 0.1, 1.0)
        dry = qe.physical() <= 0.0
        assert np.all(rate.physical()[dry] == 0.0)
        assert np.all(source.physical()[dry] == 0.0)
        wet = ~dry
        assert np.allclose(rate.physical()[wet], qe.physical()[wet] / 0.1)
        assert np.allclose(source.physical(), -2.0 * rate.physical())

    def test_epsilon_must_be_positive(self, grid2: Grid2) -> None:
        """Test the relaxation-time check."""
        with pytest.raises(ConfigError):
            precipitation(SpectralField.zeros(grid2), 0.0, 1.0)


@pytest.mark.unit
class TestConfig:
    """Tests for TAMConfig."""

    def test_weights(self, grid2: Grid2) -> None:
        """Test the energy weights for alpha = 1, Qbar = 0.5."""
        cfg = TAMConfig(grid=grid2, epsilon=0.1, dt=1e-3)
        assert cfg.weights == pytest.approx((1.0, 1.0, 1.0, 1.0, 1.0, 1.0 / 3.0))

    def test_sink_rate(self, grid2: Grid2) -> None:
        """Test (1 + alpha)/eps in relaxed mode and 0 otherwise."""
        assert TAMConfig(grid=grid2, epsilon=0.1, dt=1e-3).sink_rate == pytest.approx(20.0)
        assert TAMConfig(grid=grid2, limit=True, dt=1e-3).sink_rate == 0.0
        assert TAMConfig(grid=grid2, epsilon=0.1, precipitation=False, dt=1e-3).sink_rate == 0.0

    def test_relaxed_needs_epsilon(self, grid2: Grid2) -> None:
        """Test that relaxed mode without epsilon is refused."""
        with pytest.raises(ValueError, match="epsilon > 0"):
            TAMConfig(grid=grid2, dt=1e-3)

    @pytest.mark.parametrize(("alpha", "Qbar"), [(1.0, 1.0), (1.0, 0.0), (-0.6, 0.5)])
    def test_moist_constants(self, grid2: Grid2, alpha: float, Qbar: float) -> None:
        """Test the admissibility of alpha and Qbar."""
        with pytest.raises(ValueError):
            TAMConfig(grid=grid2, alpha=alpha, Qbar=Qbar, epsilon=0.1, dt=1e-3)


@pytest.mark.unit
class TestRelaxedStep:
    """Tests for the relaxed stepper."""

    def test_fixed_point(self, grid2: Grid2) -> None:
        """Test that a rest state with constant T_e and q_e < 0 does not move."""
        solver = tam_solver(grid2, epsilon=0.1)
        state = _rest(solver, Te=0.3, qe=-0.5)
        new = state
        for _ in range(5):
            new = solver.step(new)
        for a, b in zip(new.fields, state.fields, strict=True):
            assert max_abs_diff(a, b) < 1e-15

    def test_supersaturation_decays(self, grid2: Grid2) -> None:
        """Test q_e -> q_e exp(-(1 + alpha) dt / eps) at rest."""
        dt = 1e-3
        solver = tam_solver(grid2, epsilon=0.1, dt=dt)
        state = _rest(solver, qe=0.2)
        for _ in range(5):
            state = solver.step(state)
        expected = 0.2 * np.exp(-20.0 * 5 * dt)
        assert np.abs(state.qe.physical() - expected).max() < 1e-14
        assert solver.diagnose(state).extras["q_plus_sq"] > 0

    def test_no_sink_without_precipitation(self, grid2: Grid2) -> None:
        """Test that the sink switch keeps a positive q_e at rest."""
        solver = tam_solver(grid2, epsilon=0.1, precipitation=False)
        state = solver.step(_rest(solver, qe=0.2))
        assert np.abs(state.qe.physical() - 0.2).max() < 1e-15

    def test_dry_step_is_pure_transport(self, grid2: Grid2) -> None:
        """Test that a relaxed step without precipitation is the bare transport step."""
        solver = tam_solver(grid2, epsilon=0.01, precipitation=False)
        u = (field_from(grid2, lambda x, y: np.cos(x) * np.sin(y)), field_from(grid2, lambda x, y: -np.sin(x) * np.cos(y)))
        v = (field_from(grid2, lambda x, y: 0.2 * np.sin(x)), field_from(grid2, lambda x, y: 0.1 * np.cos(y)))
        Te = field_from(grid2, lambda x, y: 0.1 * np.sin(x + y))
        qe = field_from(grid2, lambda x, y: 0.3 * np.cos(x + y))
        state = solver.initial_state(u, v, Te, qe)

        stepped = tam_step_relaxed(state, solver.cfg)
        transported, _ = _transport(state, solver.cfg)
        for a, b in zip(stepped.fields, transported, strict=True):
            assert max_abs_diff(a, b) == 0.0
        assert stepped.qe.physical().max() > 0.0

    def test_refuses_limit_config(self, grid2: Grid2) -> None:
        """Test that the relaxed stepper refuses a limit-mode config."""
        solver = tam_solver(grid2, epsilon=None)
        with pytest.raises(PreconditionError):
            tam_step_relaxed(_rest(solver), solver.cfg)

    def test_velocity_stays_solenoidal(self, grid2: Grid2) -> None:
        """Test that the barotropic velocity remains divergence-free."""
        solver = tam_solver(grid2, epsilon=0.1, dt=1e-3)
        u = (field_from(grid2, lambda x, y: np.cos(x) * np.sin(y)), field_from(grid2, lambda x, y: -np.sin(x) * np.cos(y)))
        v = (field_from(grid2, lambda x, y: 0.2 * np.sin(x)), SpectralField.zeros(grid2))
        state = solver.initial_state(u, v, SpectralField.zeros(grid2), SpectralField.constant(grid2, -0.1))
        for _ in range(10):
            state = solver.step(state)
        assert np.abs(divergence_h(state.u1, state.u2).physical()).max() < 1e-12


@pytest.mark.unit
class TestLimitStep:
    """Tests for the epsilon -> 0 stepper."""

    def _divergent_state(self, solver: TAMSolver) -> TAMState:
        grid = solver.cfg.grid
        zeros = SpectralField.zeros(grid)
        v = (field_from(grid, lambda x, y: 0.1 * np.sin(x)), zeros)
        return solver.initial_state((zeros, zeros), v, zeros, zeros)

    def test_keeps_moisture_nonpositive(self, grid2: Grid2) -> None:
        """Test that q_e <= 0 holds exactly after every limit step."""
        solver = tam_solver(grid2, epsilon=None)
        state = self._divergent_state(solver)
        for _ in range(5):
            state = solver.step(state)
            assert state.qe.physical().max() <= 0.0
        assert state.clip is not None
        assert 0.0 < state.clip.active_fraction < 1.0
        assert state.clip.transport_residual == 0.0

    def test_pure_divergence_from_saturation(self, grid2: Grid2) -> None:
        """Test q_e = min(0, -dt (Qbar + alpha) div v) after one step from q_e = 0, u = 0."""
        dt = 1e-3
        solver = tam_solver(grid2, epsilon=None, dt=dt)
        zeros = SpectralField.zeros(grid2)
        v = (field_from(grid2, lambda x, y: -np.cos(x)), zeros)
        state = solver.step(solver.initial_state((zeros, zeros), v, zeros, zeros))

        x = grid2.coordinates()[0]
        coupling = solver.cfg.Qbar + solver.cfg.alpha
        expected = np.minimum(0.0, -dt * coupling * np.sin(x))
        # the bootstrap step sees div v damped by 1/(1 + mu dt/2)
        assert np.abs(state.qe.physical() - expected).max() < coupling * dt**2
        assert state.clip is not None
        assert 0.4 <= state.clip.active_fraction <= 0.6

    def test_rejects_supersaturated_input(self, grid2: Grid2) -> None:
        """Test the q_e <= 0 precondition."""
        solver = tam_solver(grid2, epsilon=None)
        with pytest.raises(PreconditionError):
            solver.step(_rest(solver, qe=0.01))

    def test_inactive_clip_matches_transport(self, grid2: Grid2) -> None:
        """Test that the limit step equals the relaxed step where q_e stays negative."""
        limit = tam_solver(grid2, epsilon=None)
        relaxed = tam_solver(grid2, epsilon=0.1)
        zeros = SpectralField.zeros(grid2)
        v = (field_from(grid2, lambda x, y: 0.1 * np.sin(x)), zeros)
        qe = SpectralField.constant(grid2, -0.5)
        a = limit.step(limit.initial_state((zeros, zeros), v, zeros, qe))
        b = relaxed.step(relaxed.initial_state((zeros, zeros), v, zeros, qe))
        for fa, fb in zip(a.fields, b.fields, strict=True):
            assert max_abs_diff(fa, fb) < 1e-15
        assert a.clip is not None
        assert a.clip.active_fraction == 0.0


@pytest.mark.unit
class TestReconstruction:
    """Tests for the vertical reconstruction."""

    def test_constant_fields(self) -> None:
        """Test V = u + sqrt2 v cos, W = 0 and Theta = sqrt2 theta sin for constant data."""
        grid = make_grid2(8)
        one = SpectralField.constant(grid, 1.0)
        zeros = SpectralField.zeros(grid)
        profile = reconstruct_baroclinic((one, zeros), (one, zeros), one, [0.0, 0.5, 1.0], 1.0)
        root2 = np.sqrt(2.0)
        assert profile.V[:, 0, 0, 0] == pytest.approx([1.0 + root2, 1.0, 1.0 - root2])
        assert np.abs(profile.V[:, 1]).max() == 0.0
        assert np.abs(profile.W).max() < 1e-15
        assert profile.Theta[:, 0, 0] == pytest.approx([0.0, root2, 0.0], abs=1e-15)

    def test_vertical_velocity_of_divergent_mode(self) -> None:
        """Test W = -(H/pi) sqrt2 div v sin(pi z/H)."""
        grid = make_grid2(16)
        zeros = SpectralField.zeros(grid)
        v1 = field_from(grid, lambda x, y: np.sin(x))
        profile = reconstruct_baroclinic((zeros, zeros), (v1, zeros), zeros, [0.5], 2.0)
        x = grid.coordinates()[0]
        expected = -(2.0 / np.pi) * np.cos(x) * np.sqrt(2.0) * np.sin(np.pi / 4.0)
        assert np.abs(profile.W[0] - expected).max() < 1e-13

    def test_height_must_be_positive(self, grid2: Grid2) -> None:
        """Test the H > 0 check."""
        zeros = SpectralField.zeros(grid2)
        with pytest.raises(ConfigError):
            reconstruct_baroclinic((zeros, zeros), (zeros, zeros), zeros, [0.0], 0.0)


@pytest.mark.unit
class TestSolverAdapter:
    """Tests for TAMSolver fields and restore."""

    def test_restore_round_trip(self, grid2: Grid2) -> None:
        """Test that restore rebuilds the named fields."""
        solver = tam_solver(grid2, epsilon=0.1)
        state = solver.step(_rest(solver, Te=0.2, qe=-0.3))
        restored = solver.restore(solver.fields(state), state.t, state.step)
        assert list(solver.fields(state)) == ["u1", "u2", "v1", "v2", "Te", "qe"]
        for a, b in zip(restored.fields, state.fields, strict=True):
            assert max_abs_diff(a, b) < 1e-15
        assert (restored.t, restored.step) == (state.t, state.step)

    def test_diagnostics(self, grid2: Grid2) -> None:
        """Test energy and monitors of a rest state with constant data."""
        solver = tam_solver(grid2, epsilon=0.1)
        diagnostics = solver.diagnose(_rest(solver, Te=0.0, qe=-0.5))
        volume = grid2.volume
        assert diagnostics.energy == pytest.approx(0.5 * volume * 0.25 / 3.0)
        assert diagnostics.dissipation == 0.0
        assert diagnostics.extras["qe_max"] == pytest.approx(-0.5)
        assert diagnostics.extras["q_plus_sq_over_eps"] == 0.0
