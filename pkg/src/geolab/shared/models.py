"""Data models for geolab runs, sweeps and reports.

All models use Pydantic for validation and serialization. Mathematical
constraints are raised as "constraint_violation" errors whose context carries
the config key and the condition, so callers can quote both.
"""

from enum import Enum
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_core import PydanticCustomError

CONSTRAINT_ERROR = "constraint_violation"


def constraint_violation(key: str, constraint: str, detail: str) -> PydanticCustomError:
    """Build the error raised when a mathematical condition on the config fails."""
    return PydanticCustomError(
        CONSTRAINT_ERROR,
        "constraint '{constraint}' violated ({detail})",
        {"key": key, "constraint": constraint, "detail": detail},
    )


class SystemTag(str, Enum):
    """Simulated system."""

    SNS = "sns"  # Scaled Navier-Stokes on M x (-1, 1)
    PE = "pe"  # Primitive equations on M x (-h, h)
    TAM = "tam"  # Moist tropical atmosphere (2-D)


class PEVariant(str, Enum):
    """Dissipation variant of the primitive equations."""

    FV = "FV"  # Full viscosity, vertical diffusivity
    FH = "FH"  # Full viscosity, horizontal diffusivity
    HH = "HH"  # Horizontal viscosity, horizontal diffusivity
    HV = "HV"  # Horizontal viscosity, vertical diffusivity
    NOTEMP = "NOTEMP"  # Full viscosity, no temperature


class SweepKind(str, Enum):
    """Singular limit studied by a sweep."""

    HYDROSTATIC = "hydrostatic"
    RELAXATION = "relaxation"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SystemSection(_Section):
    """[system] section."""

    system: SystemTag = Field(..., description="System tag: sns, pe or tam")
    variant: PEVariant = Field(default=PEVariant.FV, description="PE dissipation variant")
    limit: bool = Field(default=False, description="TAM: run the epsilon -> 0 limit system")


class GridSection(_Section):
    """[grid] section. The vertical period is fixed by the system (2 or 2h)."""

    N1: int = Field(default=32, description="Modes in x")
    N2: int = Field(default=32, description="Modes in y")
    N3: int | None = Field(default=None, description="Modes in z (3-D systems)")
    L1: float = Field(default=1.0, gt=0, description="x-period")
    L2: float = Field(default=1.0, gt=0, description="y-period")

    @field_validator("N1", "N2", "N3")
    @classmethod
    def even_mode_count(cls, v: int | None) -> int | None:
        """Mode counts must be even and at least 8."""
        if v is not None and (v < 8 or v % 2):
            msg = f"mode count must be even and >= 8, got {v}"
            raise ValueError(msg)
        return v


class PhysicsSection(_Section):
    """[physics] section."""

    epsilon: float | None = Field(default=None, description="Aspect ratio (sns) or relaxation time (tam)")
    f0: float = Field(default=1.0, description="Coriolis parameter")
    h: float = Field(default=1.0, description="PE half-height")
    alpha: float = Field(default=1.0, description="Moisture coupling constant")
    Qbar: float = Field(default=0.5, description="Gross moisture stratification")
    qhat: float = Field(default=1.0, description="Saturation offset")
    H: float = Field(default=1.0, description="Troposphere height (reconstruction only)")
    mu: float = Field(default=1.0, description="TAM viscosity")
    nonlinear: bool = Field(default=True, description="Keep advection terms")
    precipitation: bool = Field(default=True, description="TAM: keep the precipitation sink")


class IntegratorSection(_Section):
    """[integrator] section."""

    dt: float = Field(default=1e-3, gt=0, description="Time step")
    t_end: float = Field(default=0.1, ge=0, description="Final time")
    cfl: float = Field(default=0.5, gt=0, description="CFL safety factor")
    sample_interval: int = Field(default=5, ge=1, description="Steps between recorded samples")


class ICSection(_Section):
    """[ic] section: named generator plus its parameters."""

    name: str = Field(default="zero", description="Initial-condition generator")
    params: dict[str, Any] = Field(default_factory=dict, description="Generator parameters")


class OutputSection(_Section):
    """[output] section."""

    dir: str = Field(default="runs", description="Output directory")
    checkpoint_every: int = Field(default=0, ge=0, description="Steps between checkpoints (0 = final only)")
    formats: list[Literal["csv", "jsonl", "human"]] = Field(
        default_factory=lambda: ["csv", "jsonl", "human"], description="Report formats"
    )


class RunConfig(_Section):
    """Fully validated run configuration."""

    system: SystemSection
    grid: GridSection = Field(default_factory=GridSection)
    physics: PhysicsSection = Field(default_factory=PhysicsSection)
    integrator: IntegratorSection = Field(default_factory=IntegratorSection)
    ic: ICSection = Field(default_factory=ICSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def check_system_constraints(self) -> "RunConfig":
        """Re-validate the solver-level invariants of the selected system."""
        tag = self.system.system
        phys = self.physics
        if tag in (SystemTag.SNS, SystemTag.PE) and self.grid.N3 is None:
            raise constraint_violation("grid.N3", "N3 given for 3-D systems", "missing")
        if tag is SystemTag.SNS and (phys.epsilon is None or phys.epsilon <= 0):
            raise constraint_violation("physics.epsilon", "epsilon > 0", f"epsilon={phys.epsilon}")
        if tag is SystemTag.PE and phys.h <= 0:
            raise constraint_violation("physics.h", "h > 0", f"h={phys.h}")
        if tag is SystemTag.TAM:
            check_moist_parameters(phys.alpha, phys.Qbar, phys.qhat)
            if not self.system.limit and (phys.epsilon is None or phys.epsilon <= 0):
                raise constraint_violation(
                    "physics.epsilon", "epsilon > 0", f"epsilon={phys.epsilon} in relaxed mode"
                )
            if phys.mu <= 0:
                raise constraint_violation("physics.mu", "mu > 0", f"mu={phys.mu}")
            if phys.H <= 0:
                raise constraint_violation("physics.H", "H > 0", f"H={phys.H}")
        return self


def check_moist_parameters(alpha: float, Qbar: float, qhat: float) -> None:
    """Admissibility of the moist coupling constants."""
    if not 0 < Qbar < 1:
        raise constraint_violation("physics.Qbar", "0 < Qbar < 1", f"Qbar={Qbar}")
    if not alpha + Qbar > 0:
        raise constraint_violation("physics.alpha", "alpha + Qbar > 0", f"alpha + Qbar={alpha + Qbar}")
    if not qhat > 0:
        raise constraint_violation("physics.qhat", "qhat > 0", f"qhat={qhat}")


class StepDiagnostics(BaseModel):
    """Invariant monitors and budget terms of one state."""

    model_config = ConfigDict(frozen=True)

    step: int = Field(..., ge=0, description="Step index")
    t: float = Field(..., description="Time")
    energy: float = Field(..., description="System energy")
    dissipation: float = Field(..., description="Rate of energy removal by the implicit dissipation")
    exchange: float = Field(..., description="Energy input rate of the explicit terms")
    divergence_residual: float = Field(default=0.0, description="Max incompressibility residual")
    symmetry_residual: float = Field(default=0.0, description="Max z-symmetry residual")
    max_speed: float = Field(default=0.0, description="Max pointwise speed")
    extras: dict[str, float] = Field(default_factory=dict, description="System-specific monitors")


class SweepSpec(BaseModel):
    """An epsilon sweep probing one singular limit."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: SweepKind
    epsilons: list[float] = Field(..., description="Strictly decreasing epsilon values")
    ic: ICSection = Field(default_factory=ICSection)
    resolution: tuple[int, ...] = Field(..., description="(N1, N2, N3) or (N1, N2)")
    dt: float = Field(..., gt=0)
    t_end: float = Field(..., gt=0)
    sample_interval: int = Field(default=5, ge=1, le=10, description="Steps between error samples")
    lengths: tuple[float, float] | None = Field(default=None, description="Box lengths (system default when unset)")
    physics: PhysicsSection = Field(default_factory=PhysicsSection)
    workers: int = Field(default=1, ge=1, description="Parallel per-epsilon runs")

    @field_validator("epsilons")
    @classmethod
    def decreasing_epsilons(cls, v: list[float]) -> list[float]:
        """At least three positive, strictly decreasing values with a common ratio."""
        if len(v) < 3:
            msg = f"a sweep needs at least 3 epsilon values, got {len(v)}"
            raise ValueError(msg)
        if any(e <= 0 for e in v):
            msg = "epsilon values must be positive"
            raise ValueError(msg)
        ratios = [b / a for a, b in zip(v, v[1:], strict=False)]
        if any(r >= 1 for r in ratios):
            msg = "epsilon values must be strictly decreasing"
            raise ValueError(msg)
        if max(ratios) - min(ratios) > 1e-6 * max(ratios):
            msg = f"epsilon ratios must be uniform, got {ratios}"
            raise ValueError(msg)
        return v

    @model_validator(mode="after")
    def resolution_matches_kind(self) -> "SweepSpec":
        """Hydrostatic sweeps are 3-D, relaxation sweeps 2-D."""
        expected = 3 if self.kind is SweepKind.HYDROSTATIC else 2
        if len(self.resolution) != expected:
            msg = f"{self.kind.value} sweeps need {expected} mode counts, got {self.resolution}"
            raise ValueError(msg)
        return self


class RunStatus(str, Enum):
    """Outcome of one epsilon run."""

    OK = "ok"
    FAILED = "failed"


class StudyRow(BaseModel):
    """Errors measured for one epsilon."""

    model_config = ConfigDict(frozen=True)

    epsilon: float
    status: RunStatus = RunStatus.OK
    error: float | None = Field(default=None, description="sup-in-time L2 error of the limit")
    error_h1: float | None = Field(default=None, description="sup-in-time H1 error (hydrostatic)")
    dissipation_integral: float | None = Field(
        default=None, description="time integral of the gradient norm of the error (hydrostatic)"
    )
    hydrostatic_residual: float | None = Field(default=None, description="sup-in-time ||d_z p_eps||_2")
    q_plus_integral: float | None = Field(
        default=None, description="time integral of ||q_e^+||^2 / epsilon (relaxation)"
    )
    budget_residual: float | None = Field(default=None, description="max energy-budget residual")
    included_in_fit: bool = True
    message: str | None = None
    runtime_s: float | None = Field(default=None, description="wall clock, human output only")


class StudyStatus(str, Enum):
    """Overall outcome of a sweep."""

    OK = "ok"
    EXACT_ZERO = "exact-zero"
    FIT_FAILED = "fit-failed"


class StudyReport(BaseModel):
    """Epsilon-sweep error table with its fitted convergence rate."""

    model_config = ConfigDict(frozen=True)

    kind: SweepKind
    rows: list[StudyRow]
    slope: float | None = None
    residual: float | None = None
    expected_slope: float
    status: StudyStatus = StudyStatus.OK
    reference: str = Field(..., description="What the errors are measured against")
    cross_check: dict[str, float] = Field(default_factory=dict)
    runtime_s: float | None = Field(default=None, description="wall clock, human output only")
