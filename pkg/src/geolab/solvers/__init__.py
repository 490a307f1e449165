"""Time integrators for the scaled Navier-Stokes, primitive-equation and tropical-atmosphere systems."""

from geolab.solvers.integrators import (
    BlowUpError,
    ConstraintViolationError,
    PreconditionError,
    Solver,
    StepRejectedError,
)
from geolab.solvers.pe import PEConfig, PESolver, PEState
from geolab.solvers.sns import SNSConfig, SNSSolver, SNSState
from geolab.solvers.tam import TAMConfig, TAMSolver, TAMState

__all__ = [
    "BlowUpError",
    "ConstraintViolationError",
    "PEConfig",
    "PESolver",
    "PEState",
    "PreconditionError",
    "SNSConfig",
    "SNSSolver",
    "SNSState",
    "Solver",
    "StepRejectedError",
    "TAMConfig",
    "TAMSolver",
    "TAMState",
]
