"""Moist tropical atmosphere: barotropic/first-baroclinic interaction with moisture.

    d_t u + (u.grad) u - mu Lap u + grad p + div(v (x) v) = 0,   div u = 0
    d_t v + (u.grad) v - mu Lap v + (v.grad) u = grad(T_e - q_e) / (1 + alpha)
    d_t T_e + u.grad T_e - (1 - Qbar) div v = 0
    d_t q_e + u.grad q_e + (Qbar + alpha) div v = -(1 + alpha) q_e^+ / eps

on a doubly periodic box. The relaxed stepper integrates the stiff sink
exactly on the positive part after the transport step; the limit stepper
replaces it by q_e <- min(q_e, 0), which keeps q_e <= 0 exactly and leaves
the transport update untouched wherever the clip is inactive.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from functools import partial
from typing import TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from geolab.shared.errors import ConfigError
from geolab.shared.logging import get_logger
from geolab.shared.models import StepDiagnostics, SystemTag, check_moist_parameters, constraint_violation
from geolab.solvers.integrators import (
    Fields,
    PreconditionError,
    check_cfl,
    check_finite,
    cnab2_step,
    weighted_dissipation,
    weighted_energy,
    weighted_work,
)
from geolab.spectral.field import Axis, SpectralField, derivative
from geolab.spectral.grid import Grid2
from geolab.spectral.operators import (
    NormKind,
    advection_many,
    dealiased_product,
    divergence_h,
    laplacian_symbol,
    leray_project,
    norm,
    vector_norm,
)

logger = get_logger(__name__)

FIELD_NAMES = ("u1", "u2", "v1", "v2", "Te", "qe")

Scalar = TypeVar("Scalar", float, np.ndarray, SpectralField)


class TAMConfig(BaseModel):
    """Tropical atmosphere run parameters."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: Grid2 = Field(..., description="Horizontal grid (default box 2*pi x 2*pi)")
    alpha: float = Field(default=1.0, description="Moisture coupling constant")
    Qbar: float = Field(default=0.5, description="Gross moisture stratification")
    qhat: float = Field(default=1.0, description="Saturation offset")
    epsilon: float | None = Field(default=None, description="Relaxation time (relaxed mode)")
    limit: bool = Field(default=False, description="Run the epsilon -> 0 limit system")
    mu: float = Field(default=1.0, gt=0, description="Viscosity of u and v")
    H_height: float = Field(default=1.0, gt=0, description="Troposphere height, reconstruction only")
    dt: float = Field(..., gt=0, description="Time step")
    t_end: float = Field(default=1.0, ge=0, description="Final time")
    cfl: float = Field(default=0.5, gt=0, description="CFL safety factor")
    precipitation: bool = Field(default=True, description="Keep the precipitation sink")

    @model_validator(mode="after")
    def admissible_parameters(self) -> "TAMConfig":
        """Moist constants admissible; a positive relaxation time in relaxed mode."""
        check_moist_parameters(self.alpha, self.Qbar, self.qhat)
        if not self.limit and (self.epsilon is None or self.epsilon <= 0):
            raise constraint_violation("physics.epsilon", "epsilon > 0", f"epsilon={self.epsilon}")
        return self

    @property
    def weights(self) -> tuple[float, ...]:
        """Energy weights making the coupling terms cancel."""
        a = 1.0 / ((1.0 + self.alpha) * (1.0 - self.Qbar))
        b = 1.0 / ((1.0 + self.alpha) * (self.Qbar + self.alpha))
        return (1.0, 1.0, 1.0, 1.0, a, b)

    @property
    def sink_rate(self) -> float:
        """(1 + alpha) / eps, or 0 when the sink is off or in limit mode."""
        if self.limit or not self.precipitation or self.epsilon is None:
            return 0.0
        return (1.0 + self.alpha) / self.epsilon


@dataclass(frozen=True)
class ClipDiagnostics:
    """Outcome of the limit-mode clip."""

    active_fraction: float
    transport_residual: float


@dataclass(frozen=True)
class TAMState:
    """TAM snapshot."""

    u1: SpectralField
    u2: SpectralField
    v1: SpectralField
    v2: SpectralField
    Te: SpectralField
    qe: SpectralField
    t: float = 0.0
    step: int = 0
    forcing: Fields | None = None
    forcing_prev: Fields | None = None
    clip: ClipDiagnostics | None = None

    @property
    def fields(self) -> Fields:
        return (self.u1, self.u2, self.v1, self.v2, self.Te, self.qe)


def _check_alpha(alpha: float) -> None:
    if alpha <= -1.0:
        msg = f"alpha={alpha} makes the equivalent-variable map singular"
        raise ConfigError(msg, key="physics.alpha", constraint="alpha > -1")


def to_equivalent(theta: Scalar, q: Scalar, alpha: float, qhat: float) -> tuple[Scalar, Scalar]:
    """T_e = q + theta, q_e = q - alpha theta - qhat."""
    _check_alpha(alpha)
    return q + theta, q - alpha * theta - qhat


def from_equivalent(Te: Scalar, qe: Scalar, alpha: float, qhat: float) -> tuple[Scalar, Scalar]:
    """Inverse of to_equivalent: (theta, q)."""
    _check_alpha(alpha)
    theta = (Te - qe - qhat) / (1.0 + alpha)
    return theta, Te - theta


def precipitation(qe: SpectralField, epsilon: float, alpha: float) -> tuple[SpectralField, SpectralField]:
    """Precipitation P = q_e^+ / eps and the moisture source -(1 + alpha) P, pointwise.

    Both are exactly zero wherever q_e <= 0 on the grid.
    """
    if not epsilon > 0:
        msg = f"epsilon={epsilon}"
        raise ConfigError(msg, key="physics.epsilon", constraint="epsilon > 0")
    rate = np.maximum(qe.physical(), 0.0) / epsilon
    return (
        SpectralField.from_physical(qe.grid, rate),
        SpectralField.from_physical(qe.grid, -(1.0 + alpha) * rate),
    )


def _forcing(fields: Fields, cfg: TAMConfig) -> Fields:
    """Transport and coupling terms; the sink is handled separately."""
    u1, u2, v1, v2, Te, qe = fields
    u = (u1, u2)
    v = (v1, v2)
    adv_u = advection_many(u, [u1, u2, v1, v2, Te, qe])
    adv_v = advection_many(v, [u1, u2])
    axes = (Axis.X, Axis.Y)
    flux = []
    for vi in v:
        flux.append(
            sum(
                (derivative(dealiased_product(vj, vi), axis) for vj, axis in zip(v, axes, strict=True)),
                SpectralField.zeros(cfg.grid),
            )
        )
    f_u = leray_project((-adv_u[0] - flux[0], -adv_u[1] - flux[1]))
    potential = (Te - qe) / (1.0 + cfg.alpha)
    f_v1 = -adv_u[2] - adv_v[0] + derivative(potential, Axis.X)
    f_v2 = -adv_u[3] - adv_v[1] + derivative(potential, Axis.Y)
    div_v = divergence_h(v1, v2)
    f_Te = -adv_u[4] + (1.0 - cfg.Qbar) * div_v
    f_qe = -adv_u[5] - (cfg.Qbar + cfg.alpha) * div_v
    return (*f_u, f_v1, f_v2, f_Te, f_qe)


def _project(fields: Fields) -> Fields:
    u1, u2 = leray_project((fields[0], fields[1]))
    return (u1, u2, *fields[2:])


def tam_symbols(cfg: TAMConfig) -> tuple[np.ndarray | float, ...]:
    viscous = cfg.mu * laplacian_symbol(cfg.grid)
    return (viscous, viscous, viscous, viscous, 0.0, 0.0)


def _transport(state: TAMState, cfg: TAMConfig) -> tuple[Fields, Fields]:
    fields = state.fields
    check_finite(fields, state.t)
    check_cfl((state.u1, state.u2), cfg.grid.spacing, cfg.dt, cfg.cfl)
    check_cfl((state.v1, state.v2), cfg.grid.spacing, cfg.dt, cfg.cfl)
    f_now = state.forcing if state.forcing is not None else _forcing(fields, cfg)
    new, _ = cnab2_step(
        fields,
        tam_symbols(cfg),
        cfg.dt,
        partial(_forcing, cfg=cfg),
        f_now,
        state.forcing_prev,
        _project,
    )
    check_finite(new, state.t + cfg.dt)
    return new, f_now


def _complete(
    fields: Fields,
    cfg: TAMConfig,
    t: float,
    step: int,
    forcing_prev: Fields | None,
    clip: ClipDiagnostics | None = None,
) -> TAMState:
    forcing = _forcing(fields, cfg)
    return TAMState(*fields, t=t, step=step, forcing=forcing, forcing_prev=forcing_prev, clip=clip)


def tam_initial_state(
    u: tuple[SpectralField, SpectralField],
    v: tuple[SpectralField, SpectralField],
    Te: SpectralField,
    qe: SpectralField,
    cfg: TAMConfig,
    t: float = 0.0,
) -> TAMState:
    """State from (u, v, T_e, q_e); u is Leray-projected."""
    u1, u2 = leray_project(u)
    mode = "limit" if cfg.limit else f"relaxed eps={cfg.epsilon}"
    logger.info("mode=<%s>, grid=<%s> | tropical atmosphere initialized", mode, cfg.grid.sizes)
    return _complete((u1, u2, v[0], v[1], Te, qe), cfg, t, 0, None)


def tam_step_relaxed(state: TAMState, cfg: TAMConfig) -> TAMState:
    """Transport step followed by exact decay of the positive part of q_e."""
    if cfg.limit:
        msg = "tam_step_relaxed called with a limit-mode config"
        raise PreconditionError(msg)
    new, f_now = _transport(state, cfg)
    qe = new[5]
    rate = cfg.sink_rate
    values = qe.physical()
    if rate > 0.0 and np.any(values > 0.0):
        decayed = np.where(values > 0.0, values * np.exp(-rate * cfg.dt), values)
        qe = SpectralField.from_physical(cfg.grid, decayed)
    logger.debug("epsilon=<%s>, step=<%d> | tam relaxed step", cfg.epsilon, state.step + 1)
    return _complete((*new[:5], qe), cfg, state.t + cfg.dt, state.step + 1, f_now)


def tam_step_limit(state: TAMState, cfg: TAMConfig) -> TAMState:
    """Transport step followed by q_e <- min(q_e, 0).

    Raises:
        PreconditionError: If the input q_e is positive anywhere on the grid
    """
    peak = float(state.qe.physical().max())
    if peak > 0.0:
        msg = f"limit stepper needs q_e <= 0, got max {peak:.3e}"
        raise PreconditionError(msg)
    new, f_now = _transport(state, cfg)
    transported = new[5].physical()
    clipped = np.minimum(transported, 0.0)
    active = transported > 0.0
    inactive_gap = np.abs(clipped - transported)[~active]
    clip = ClipDiagnostics(
        active_fraction=float(active.mean()),
        transport_residual=float(inactive_gap.max()) if inactive_gap.size else 0.0,
    )
    qe = SpectralField.from_physical(cfg.grid, clipped)
    logger.debug(
        "step=<%d>, active_fraction=<%s> | tam limit step", state.step + 1, clip.active_fraction
    )
    return _complete((*new[:5], qe), cfg, state.t + cfg.dt, state.step + 1, f_now, clip)


def tam_step(state: TAMState, cfg: TAMConfig) -> TAMState:
    return tam_step_limit(state, cfg) if cfg.limit else tam_step_relaxed(state, cfg)


@dataclass(frozen=True)
class BaroclinicProfile:
    """Vertical reconstruction sampled at z: arrays indexed [z, ...]."""

    z: np.ndarray
    V: np.ndarray  # (nz, 2, N1, N2)
    W: np.ndarray  # (nz, N1, N2)
    Theta: np.ndarray  # (nz, N1, N2)


def reconstruct_baroclinic(
    u: tuple[SpectralField, SpectralField],
    v: tuple[SpectralField, SpectralField],
    theta: SpectralField,
    z_samples: Sequence[float],
    H_height: float,
) -> BaroclinicProfile:
    """V = u + sqrt2 v cos(pi z/H), W = -(H/pi) div v sqrt2 sin(pi z/H), Theta = sqrt2 theta sin(pi z/H)."""
    if not H_height > 0:
        msg = f"H={H_height}"
        raise ConfigError(msg, key="physics.H", constraint="H > 0")
    z = np.asarray(z_samples, dtype=float)
    cos_mode = np.sqrt(2.0) * np.cos(np.pi * z / H_height)[:, None, None]
    sin_mode = np.sqrt(2.0) * np.sin(np.pi * z / H_height)[:, None, None]
    u_val = np.stack([c.physical() for c in u])
    v_val = np.stack([c.physical() for c in v])
    w_amp = -(H_height / np.pi) * divergence_h(*v).physical()
    V = u_val[None] + cos_mode[:, None] * v_val[None]
    return BaroclinicProfile(z=z, V=V, W=sin_mode * w_amp[None], Theta=sin_mode * theta.physical()[None])


def q_plus_sq(state: TAMState) -> float:
    """||q_e^+||_2^2 by grid quadrature."""
    positive = np.maximum(state.qe.physical(), 0.0)
    return state.qe.grid.volume * float(np.mean(positive**2))


def tam_diagnostics(state: TAMState, cfg: TAMConfig) -> StepDiagnostics:
    fields = state.fields
    forcing = state.forcing if state.forcing is not None else _forcing(fields, cfg)
    weights = cfg.weights
    q_sq = q_plus_sq(state)
    exchange = weighted_work(fields, forcing, weights) - weights[5] * cfg.sink_rate * q_sq
    extras = {
        "q_plus_sq": q_sq,
        "qe_max": float(state.qe.physical().max()),
    }
    if cfg.epsilon is not None and not cfg.limit:
        extras["q_plus_sq_over_eps"] = q_sq / cfg.epsilon
    if state.clip is not None:
        extras["clip_active_fraction"] = state.clip.active_fraction
        extras["clip_transport_residual"] = state.clip.transport_residual
    return StepDiagnostics(
        step=state.step,
        t=state.t,
        energy=weighted_energy(fields, weights),
        dissipation=weighted_dissipation(fields, tam_symbols(cfg), weights),
        exchange=exchange,
        divergence_residual=norm(divergence_h(state.u1, state.u2), NormKind.LINF),
        max_speed=max(
            vector_norm((state.u1, state.u2), NormKind.LINF),
            vector_norm((state.v1, state.v2), NormKind.LINF),
        ),
        extras=extras,
    )


class TAMSolver:
    """Harness adapter for the tropical atmosphere model."""

    system = SystemTag.TAM.value

    def __init__(self, cfg: TAMConfig) -> None:
        self.cfg = cfg

    def initial_state(
        self,
        u: tuple[SpectralField, SpectralField],
        v: tuple[SpectralField, SpectralField],
        Te: SpectralField,
        qe: SpectralField,
    ) -> TAMState:
        return tam_initial_state(u, v, Te, qe, self.cfg)

    def step(self, state: TAMState) -> TAMState:
        return tam_step(state, self.cfg)

    def diagnose(self, state: TAMState) -> StepDiagnostics:
        return tam_diagnostics(state, self.cfg)

    def fields(self, state: TAMState) -> dict[str, SpectralField]:
        return dict(zip(FIELD_NAMES, state.fields, strict=True))

    def restore(self, fields: dict[str, SpectralField], t: float, step: int) -> TAMState:
        u1, u2 = leray_project((fields["u1"], fields["u2"]))
        values = (u1, u2, *(fields[name] for name in FIELD_NAMES[2:]))
        return _complete(values, self.cfg, t, step, None)
