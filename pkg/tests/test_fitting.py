"""Tests for convergence-rate fitting and energy budgets."""

import numpy as np
import pytest

from geolab.experiments.budget import energy_budget
from geolab.experiments.fitting import FitError, fit_rate
from geolab.shared.models import StepDiagnostics


@pytest.mark.unit
class TestFitRate:
    """Tests for fit_rate."""

    def test_exact_linear_data(self) -> None:
        """Test that E = eps gives slope 1 and zero residual."""
        fit = fit_rate([0.1, 0.05, 0.025], [0.1, 0.05, 0.025])
        assert abs(fit.slope - 1.0) < 1e-12
        assert fit.residual < 1e-12
        assert fit.n_points == 3
        assert fit.excluded == []

    def test_exact_square_root_data(self) -> None:
        """Test that E = sqrt(eps) gives slope 1/2."""
        eps = [0.1, 0.05, 0.025, 0.0125]
        fit = fit_rate([np.sqrt(e) for e in eps], eps)
        assert abs(fit.slope - 0.5) < 1e-12

    def test_constant_factor_moves_intercept(self) -> None:
        """Test that E = 3 eps^2 gives slope 2 and intercept log 3."""
        eps = [0.2, 0.1, 0.05]
        fit = fit_rate([3.0 * e**2 for e in eps], eps)
        assert fit.slope == pytest.approx(2.0, abs=1e-12)
        assert fit.intercept == pytest.approx(np.log(3.0), abs=1e-12)

    def test_perturbed_data(self) -> None:
        """Test that the residual bounds the deviation of perturbed data."""
        eps = np.array([0.2, 0.1, 0.05, 0.025])
        errors = eps * np.array([1.02, 0.97, 1.01, 0.99])
        fit = fit_rate(list(errors), list(eps))
        assert 0.9 < fit.slope < 1.1
        assert 0.0 < fit.residual < 0.05

    def test_non_positive_errors_are_excluded(self) -> None:
        """Test that zero and non-finite errors are dropped and reported."""
        eps = [0.2, 0.1, 0.05, 0.025, 0.0125]
        errors = [0.2, 0.0, 0.05, float("nan"), 0.0125]
        fit = fit_rate(errors, eps)
        assert fit.excluded == [0.1, 0.025]
        assert fit.n_points == 3
        assert abs(fit.slope - 1.0) < 1e-12

    def test_too_few_points(self) -> None:
        """Test that fewer than three usable pairs raise FitError."""
        with pytest.raises(FitError, match="needs 3"):
            fit_rate([0.1, 0.0, 0.0], [0.1, 0.05, 0.025])
        with pytest.raises(FitError, match="got 2"):
            fit_rate([0.1, 0.05, 0.0], [0.1, 0.05, 0.025])

    def test_length_mismatch(self) -> None:
        """Test that unequal input lengths raise FitError."""
        with pytest.raises(FitError):
            fit_rate([0.1, 0.05], [0.1, 0.05, 0.025])

    def test_fit_error_is_numerical(self) -> None:
        """Test that FitError maps to exit code 3."""
        assert FitError("x").exit_code == 3


def _diag(t: float, energy: float, dissipation: float, exchange: float = 0.0) -> StepDiagnostics:
    return StepDiagnostics(step=0, t=t, energy=energy, dissipation=dissipation, exchange=exchange)


@pytest.mark.unit
class TestEnergyBudget:
    """Tests for energy_budget."""

    def test_exponential_decay_closes(self) -> None:
        """Test a small residual for E = exp(-2t), D = 2E over a fine sampling."""
        times = np.linspace(0.0, 1.0, 201)
        diagnostics = [_diag(t, np.exp(-2 * t), 2 * np.exp(-2 * t)) for t in times]
        budget = energy_budget(diagnostics)
        assert len(budget.residuals) == 200
        assert budget.max_abs < 1e-4
        assert budget.times[0] == pytest.approx(0.0025)

    def test_exchange_balances_growth(self) -> None:
        """Test that a constant energy input with no dissipation gives E' = X."""
        diagnostics = [_diag(t, 3.0 * t, 0.0, exchange=3.0) for t in (0.0, 0.5, 1.0)]
        assert energy_budget(diagnostics).max_abs == pytest.approx(0.0, abs=1e-15)

    def test_unbalanced_budget(self) -> None:
        """Test that missing dissipation shows up in the residual."""
        diagnostics = [_diag(0.0, 1.0, 1.0), _diag(1.0, 1.0, 1.0)]
        assert energy_budget(diagnostics).residuals == (1.0,)

    def test_repeated_samples_skipped(self) -> None:
        """Test that zero-length intervals are ignored."""
        diagnostics = [_diag(0.0, 1.0, 0.0), _diag(0.0, 1.0, 0.0)]
        budget = energy_budget(diagnostics)
        assert budget.residuals == ()
        assert budget.max_abs == 0.0
