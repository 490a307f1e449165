"""Discrete energy budgets of recorded trajectories."""

from collections.abc import Sequence
from dataclasses import dataclass

from geolab.shared.models import StepDiagnostics


@dataclass(frozen=True)
class EnergyBudget:
    """Budget residual per pair of consecutive samples.

    residual = (E_b - E_a) / (t_b - t_a) + (D_a + D_b) / 2 - (X_a + X_b) / 2,
    with D the dissipation rate and X the explicit-term energy input.
    """

    times: tuple[float, ...]
    residuals: tuple[float, ...]

    @property
    def max_abs(self) -> float:
        return max((abs(r) for r in self.residuals), default=0.0)


def energy_budget(diagnostics: Sequence[StepDiagnostics]) -> EnergyBudget:
    """Budget residuals from the diagnostics of a trajectory (midpoint times)."""
    times = []
    residuals = []
    for a, b in zip(diagnostics, diagnostics[1:], strict=False):
        span = b.t - a.t
        if span <= 0:
            continue
        rate = (b.energy - a.energy) / span
        times.append(0.5 * (a.t + b.t))
        residuals.append(rate + 0.5 * (a.dissipation + b.dissipation) - 0.5 * (a.exchange + b.exchange))
    return EnergyBudget(tuple(times), tuple(residuals))
