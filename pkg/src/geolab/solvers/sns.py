"""Scaled anisotropic Navier-Stokes on M x (-1, 1).

    d_t v + (u.grad) v - Lap v + grad_H p = 0
    eps^2 (d_t w + u.grad w - Lap w) + d_z p = 0
    div_H v + d_z w = 0

with v even, w odd and p even in z. The pressure is eliminated exactly: the
explicit forcing is projected with the anisotropic symbol |k_H|^2 + eps^-2 k_z^2,
which is the orthogonal projection for the energy inner product
<v, v'> + eps^2 <w, w'>.
"""

from dataclasses import dataclass
from functools import partial

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from geolab.shared.logging import get_logger
from geolab.shared.models import StepDiagnostics, SystemTag
from geolab.solvers.integrators import (
    ConstraintViolationError,
    Fields,
    check_cfl,
    check_finite,
    cnab2_step,
    require_symmetry,
    weighted_dissipation,
    weighted_energy,
    weighted_work,
)
from geolab.spectral.field import Axis, SpectralField, derivative, project_symmetry, symmetry_residual
from geolab.spectral.grid import Grid3, SymmetryClass
from geolab.spectral.operators import (
    GAUGE_TOLERANCE,
    NormKind,
    advection_many,
    divergence_h,
    laplacian_symbol,
    norm,
    vector_norm,
    vertical_integral,
)

logger = get_logger(__name__)

SYMMETRY = (SymmetryClass.EVEN, SymmetryClass.EVEN, SymmetryClass.ODD)


class SNSConfig(BaseModel):
    """Scaled Navier-Stokes run parameters."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: Grid3 = Field(..., description="Grid with Lz = 2")
    epsilon: float = Field(..., gt=0, description="Aspect ratio")
    dt: float = Field(..., gt=0, description="Time step")
    t_end: float = Field(default=0.5, ge=0, description="Final time")
    cfl: float = Field(default=0.5, gt=0, description="CFL safety factor")
    nonlinear: bool = Field(default=True, description="Keep advection")

    @field_validator("grid")
    @classmethod
    def unit_half_height(cls, v: Grid3) -> Grid3:
        """The SNS domain is M x (-1, 1)."""
        if not np.isclose(v.Lz, 2.0):
            msg = f"SNS grid needs Lz = 2, got {v.Lz}"
            raise ValueError(msg)
        return v

    @property
    def weights(self) -> tuple[float, float, float]:
        return (1.0, 1.0, self.epsilon**2)


@dataclass(frozen=True)
class SNSState:
    """SNS snapshot. forcing holds the projected explicit forcing at this state."""

    v1: SpectralField
    v2: SpectralField
    w: SpectralField
    p: SpectralField
    t: float = 0.0
    step: int = 0
    forcing: Fields | None = None
    forcing_prev: Fields | None = None

    @property
    def velocity(self) -> Fields:
        return (self.v1, self.v2, self.w)


def init_w_from_v(v0: tuple[SpectralField, SpectralField]) -> SpectralField:
    """w0 = -integral_0^z div_H v0, the vertical velocity making (v0, w0) solenoidal.

    Raises:
        ConstraintViolationError: If the column-integrated divergence of v0 is
            nonzero, in which case no periodic odd w0 exists
    """
    div = divergence_h(*v0)
    plane = div.coeffs[:, :, 0]
    scale = max(1.0, float(np.abs(div.coeffs).max()))
    if float(np.abs(plane).max()) > GAUGE_TOLERANCE * scale:
        msg = "column-integrated divergence of v0 is nonzero; w0 would not be periodic"
        raise ConstraintViolationError(msg)
    return project_symmetry(-vertical_integral(div, lower=0.0), SymmetryClass.ODD)


def _project(fields: Fields, epsilon: float) -> tuple[Fields, SpectralField]:
    """Remove (grad_H p, eps^-2 d_z p) so the result is solenoidal; returns p too."""
    grid = fields[0].grid
    k1, k2, kz = grid.odd_wavenumbers
    inv_eps2 = epsilon**-2
    symbol = np.broadcast_to(k1**2 + k2**2 + inv_eps2 * kz**2, grid.shape)
    kernel = symbol == 0.0
    div = k1 * fields[0].coeffs + k2 * fields[1].coeffs + kz * fields[2].coeffs
    p_hat = np.where(kernel, 0.0, -1j * div / np.where(kernel, 1.0, symbol))
    projected = (
        fields[0].with_coeffs(fields[0].coeffs - 1j * k1 * p_hat),
        fields[1].with_coeffs(fields[1].coeffs - 1j * k2 * p_hat),
        fields[2].with_coeffs(fields[2].coeffs - 1j * inv_eps2 * kz * p_hat),
    )
    symmetric = tuple(
        project_symmetry(f, cls) for f, cls in zip(projected, SYMMETRY, strict=True)
    )
    pressure = project_symmetry(SpectralField(grid, p_hat), SymmetryClass.EVEN)
    return symmetric, pressure


def _forcing_and_pressure(fields: Fields, cfg: SNSConfig) -> tuple[Fields, SpectralField]:
    if cfg.nonlinear:
        advective = advection_many(fields, fields)
        raw = tuple(-a for a in advective)
    else:
        raw = tuple(SpectralField.zeros(f.grid, f.sym) for f in fields)
    return _project(raw, cfg.epsilon)


def _forcing(fields: Fields, cfg: SNSConfig) -> Fields:
    return _forcing_and_pressure(fields, cfg)[0]


def _symbols(cfg: SNSConfig) -> tuple[np.ndarray, ...]:
    full = laplacian_symbol(cfg.grid)
    return (full, full, full)


def _complete(fields: Fields, cfg: SNSConfig, t: float, step: int, forcing_prev: Fields | None) -> SNSState:
    forcing, pressure = _forcing_and_pressure(fields, cfg)
    v1, v2, w = fields
    return SNSState(v1, v2, w, pressure, t, step, forcing, forcing_prev)


def sns_initial_state(v0: tuple[SpectralField, SpectralField], cfg: SNSConfig, t: float = 0.0) -> SNSState:
    """State from an even horizontal velocity with zero mean over the box.

    Raises:
        PreconditionError: If v0 is not even in z
        ConstraintViolationError: If v0 has a nonzero box mean or column divergence
    """
    v1 = require_symmetry(v0[0], SymmetryClass.EVEN, "v0[0]")
    v2 = require_symmetry(v0[1], SymmetryClass.EVEN, "v0[1]")
    for name, component in (("v0[0]", v1), ("v0[1]", v2)):
        if abs(component.mean) > GAUGE_TOLERANCE * max(1.0, float(np.abs(component.coeffs).max())):
            msg = f"{name} has nonzero mean {component.mean:.3e}; the box mean must vanish"
            raise ConstraintViolationError(msg)
    w = init_w_from_v((v1, v2))
    fields, _ = _project((v1, v2, w), cfg.epsilon)
    logger.info("epsilon=<%s>, grid=<%s> | scaled navier-stokes initialized", cfg.epsilon, cfg.grid.sizes)
    return _complete(fields, cfg, t, 0, None)


def sns_step(state: SNSState, cfg: SNSConfig) -> SNSState:
    """Advance one CN/AB2 step.

    Raises:
        StepRejectedError: CFL violation (suggested_dt attached)
        BlowUpError: Non-finite state
    """
    fields = state.velocity
    check_finite(fields, state.t)
    check_cfl(fields, cfg.grid.spacing, cfg.dt, cfg.cfl)
    f_now = state.forcing if state.forcing is not None else _forcing(fields, cfg)
    new, _ = cnab2_step(
        fields,
        _symbols(cfg),
        cfg.dt,
        partial(_forcing, cfg=cfg),
        f_now,
        state.forcing_prev,
        lambda u: _project(u, cfg.epsilon)[0],
    )
    check_finite(new, state.t + cfg.dt)
    logger.debug("epsilon=<%s>, step=<%d> | sns step", cfg.epsilon, state.step + 1)
    return _complete(new, cfg, state.t + cfg.dt, state.step + 1, f_now)


def hydrostatic_residual(state: SNSState) -> float:
    """||d_z p_eps||_2, which vanishes in the hydrostatic limit."""
    return norm(derivative(state.p, Axis.Z), NormKind.L2)


def divergence_residual(state: SNSState) -> float:
    div = divergence_h(state.v1, state.v2) + derivative(state.w, Axis.Z)
    return norm(div, NormKind.LINF)


def sns_energy(state: SNSState, cfg: SNSConfig) -> float:
    """1/2 (||v||^2 + eps^2 ||w||^2)."""
    return weighted_energy(state.velocity, cfg.weights)


def sns_diagnostics(state: SNSState, cfg: SNSConfig) -> StepDiagnostics:
    forcing = state.forcing if state.forcing is not None else _forcing(state.velocity, cfg)
    return StepDiagnostics(
        step=state.step,
        t=state.t,
        energy=sns_energy(state, cfg),
        dissipation=weighted_dissipation(state.velocity, _symbols(cfg), cfg.weights),
        exchange=weighted_work(state.velocity, forcing, cfg.weights),
        divergence_residual=divergence_residual(state),
        symmetry_residual=max(symmetry_residual(f) for f in (*state.velocity, state.p)),
        max_speed=vector_norm(state.velocity, NormKind.LINF),
        extras={"hydrostatic_residual": hydrostatic_residual(state)},
    )


class SNSSolver:
    """Harness adapter for the scaled Navier-Stokes system."""

    system = SystemTag.SNS.value

    def __init__(self, cfg: SNSConfig) -> None:
        self.cfg = cfg

    def initial_state(self, v0: tuple[SpectralField, SpectralField]) -> SNSState:
        return sns_initial_state(v0, self.cfg)

    def step(self, state: SNSState) -> SNSState:
        return sns_step(state, self.cfg)

    def diagnose(self, state: SNSState) -> StepDiagnostics:
        return sns_diagnostics(state, self.cfg)

    def fields(self, state: SNSState) -> dict[str, SpectralField]:
        return {"v1": state.v1, "v2": state.v2, "w": state.w, "p": state.p}

    def restore(self, fields: dict[str, SpectralField], t: float, step: int) -> SNSState:
        velocity = tuple(
            require_symmetry(fields[name], cls, name)
            for name, cls in zip(("v1", "v2", "w"), SYMMETRY, strict=True)
        )
        projected, _ = _project(velocity, self.cfg.epsilon)
        return _complete(projected, self.cfg, t, step, None)
