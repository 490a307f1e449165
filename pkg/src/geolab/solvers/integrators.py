"""Second-order IMEX core shared by all solvers.

Every system is written as dU/dt = -L U + F(U), where L is a diagonal,
nonnegative Fourier symbol per component (the dissipation selected by the
system or variant) and F collects advection, coupling and pressure terms
already projected onto the admissible subspace. L is advanced by
Crank-Nicolson, F by two-step Adams-Bashforth. The first step has no
history; it takes a half-step predictor (implicit L, explicit F) and uses the
forcing at the predicted midpoint.
"""

from collections.abc import Callable, Sequence
from typing import Protocol, TypeVar

import numpy as np

from geolab.shared.errors import NumericalError
from geolab.shared.logging import get_logger
from geolab.shared.models import StepDiagnostics
from geolab.spectral.field import SpectralField, project_symmetry
from geolab.spectral.grid import SymmetryClass
from geolab.spectral.operators import inner, symbol_energy

logger = get_logger(__name__)

SYMMETRY_TOLERANCE = 1e-10

Fields = tuple[SpectralField, ...]
ForcingFn = Callable[[Fields], Fields]
ProjectFn = Callable[[Fields], Fields]


class StepRejectedError(NumericalError):
    """CFL condition violated; the step was not taken."""

    def __init__(self, message: str, suggested_dt: float) -> None:
        """Initialize step rejection.

        Args:
            message: Description of the violation
            suggested_dt: Largest time step satisfying the CFL bound
        """
        self.suggested_dt = suggested_dt
        super().__init__(message)


class BlowUpError(NumericalError):
    """Non-finite values appeared in the state."""


class ConstraintViolationError(NumericalError):
    """A structural constraint of the system does not hold."""


class PreconditionError(NumericalError):
    """Input state outside the domain of a stepper."""


def identity(fields: Fields) -> Fields:
    return fields


def cnab2_step(
    fields: Fields,
    symbols: Sequence[np.ndarray | float],
    dt: float,
    forcing_fn: ForcingFn,
    f_now: Fields,
    f_prev: Fields | None,
    project: ProjectFn = identity,
) -> tuple[Fields, Fields]:
    """Advance one Crank-Nicolson / Adams-Bashforth step.

    Args:
        fields: State U^n
        symbols: Dissipation symbol per field (nonnegative, broadcastable)
        dt: Time step
        forcing_fn: Explicit forcing F
        f_now: F(U^n)
        f_prev: F(U^{n-1}), or None on the first step after a (re)start
        project: Projection onto the admissible subspace, applied to the result

    Returns:
        (U^{n+1}, forcing actually used over the step)
    """
    half = 0.5 * dt
    if f_prev is None:
        predicted = tuple(
            u.with_coeffs((u.coeffs + half * f.coeffs) / (1.0 + half * symbol))
            for u, f, symbol in zip(fields, f_now, symbols, strict=True)
        )
        f_used = forcing_fn(project(predicted))
    else:
        f_used = tuple(
            f.with_coeffs(1.5 * f.coeffs - 0.5 * fp.coeffs)
            for f, fp in zip(f_now, f_prev, strict=True)
        )
    updated = tuple(
        u.with_coeffs(((1.0 - half * symbol) * u.coeffs + dt * f.coeffs) / (1.0 + half * symbol))
        for u, f, symbol in zip(fields, f_used, symbols, strict=True)
    )
    return project(updated), f_used


def check_cfl(
    velocity: Sequence[SpectralField], spacing: Sequence[float], dt: float, cfl: float
) -> float:
    """Courant number max_i ||u_i||_inf dt / dx_i, raising when above the safety factor.

    Returns:
        The Courant number

    Raises:
        StepRejectedError: With the largest admissible dt
    """
    rates = [float(np.abs(u.physical()).max()) / dx for u, dx in zip(velocity, spacing, strict=False)]
    rate = max(rates) if rates else 0.0
    courant = rate * dt
    if courant > cfl:
        suggested = cfl / rate
        msg = f"CFL violated: courant {courant:.4g} > {cfl:.4g}; use dt <= {suggested:.6g}"
        raise StepRejectedError(msg, suggested_dt=suggested)
    return courant


def check_finite(fields: Fields, t: float) -> None:
    for f in fields:
        if not np.all(np.isfinite(f.coeffs)):
            msg = f"Non-finite values in the state at t={t:.6g}"
            raise BlowUpError(msg)


def require_symmetry(f: SpectralField, cls: SymmetryClass, name: str) -> SpectralField:
    """Return f labelled and projected into cls, rejecting fields that are not already in it."""
    projected = project_symmetry(f, cls)
    scale = max(1.0, float(np.abs(f.coeffs).max()))
    deviation = float(np.abs(f.coeffs - projected.coeffs).max())
    if deviation > SYMMETRY_TOLERANCE * scale:
        msg = f"{name} must be {cls.value} in z (deviation {deviation:.3e})"
        raise PreconditionError(msg)
    return projected


def weighted_energy(fields: Fields, weights: Sequence[float]) -> float:
    """1/2 sum_i w_i ||f_i||^2."""
    return 0.5 * sum(w * inner(f, f) for f, w in zip(fields, weights, strict=True))


def weighted_dissipation(
    fields: Fields, symbols: Sequence[np.ndarray | float], weights: Sequence[float]
) -> float:
    """sum_i w_i <f_i, L_i f_i>, the rate at which the implicit part removes energy."""
    total = 0.0
    for f, symbol, w in zip(fields, symbols, weights, strict=True):
        total += w * symbol_energy(f, np.broadcast_to(symbol, f.grid.shape))
    return total


def weighted_work(fields: Fields, forcing: Fields, weights: Sequence[float]) -> float:
    """sum_i w_i <f_i, F_i>, the energy exchange of the explicit forcing."""
    return sum(w * inner(f, g) for f, g, w in zip(fields, forcing, weights, strict=True))


StateT = TypeVar("StateT")


class Solver(Protocol[StateT]):
    """What the experiment harness needs from a system."""

    system: str

    def step(self, state: StateT) -> StateT: ...

    def diagnose(self, state: StateT) -> StepDiagnostics: ...

    def fields(self, state: StateT) -> dict[str, SpectralField]: ...

    def restore(self, fields: dict[str, SpectralField], t: float, step: int) -> StateT: ...
