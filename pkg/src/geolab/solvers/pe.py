"""Primitive equations on M x (-h, h) with partial viscosity and diffusivity.

    d_t v + (v.grad_H) v + w d_z v - D_v v + grad_H p + f0 k x v = 0
    d_z p = s T,   div_H v + d_z w = 0
    d_t T + v.grad_H T + w (d_z T + 1/h) - D_T T = 0

The variant picks D_v (Lap or Lap_H), D_T (d_z^2 or Lap_H) and the sign s of
the hydrostatic relation (+1 for full viscosity, -1 for horizontal viscosity).
v and p are even in z, w and T odd. The vertical velocity is diagnostic,
w = -integral_{-h}^z div_H v, and the surface pressure is the potential
removed by a 2-D Leray projection of the column mean of the momentum forcing.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from functools import partial

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from geolab.shared.errors import ConfigError
from geolab.shared.logging import get_logger
from geolab.shared.models import PEVariant, StepDiagnostics, SystemTag
from geolab.solvers.integrators import (
    ConstraintViolationError,
    Fields,
    PreconditionError,
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
    InvalidNormError,
    NormKind,
    advection_many,
    barotropic_project,
    curl_h,
    divergence_h,
    extend_plane,
    gradient_h,
    laplacian_symbol,
    norm,
    tail_fraction,
    vector_norm,
    vertical_integral,
    z_mean_plane,
)

logger = get_logger(__name__)

DEFAULT_LQ_EXPONENTS = (2.0, 4.0, 8.0, 16.0, 32.0)

# (full viscosity on v, vertical diffusivity on T)
_VARIANT_OPERATORS: dict[PEVariant, tuple[bool, bool]] = {
    PEVariant.FV: (True, True),
    PEVariant.FH: (True, False),
    PEVariant.HH: (False, False),
    PEVariant.HV: (False, True),
    PEVariant.NOTEMP: (True, False),
}


class PEConfig(BaseModel):
    """Primitive-equation run parameters."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: Grid3 = Field(..., description="Grid with Lz = 2h")
    h: float = Field(default=1.0, gt=0, description="Half-height")
    f0: float = Field(default=1.0, description="Coriolis parameter")
    variant: PEVariant = Field(default=PEVariant.FV, description="Dissipation variant")
    dt: float = Field(..., gt=0, description="Time step")
    t_end: float = Field(default=0.5, ge=0, description="Final time")
    cfl: float = Field(default=0.5, gt=0, description="CFL safety factor")
    nonlinear: bool = Field(default=True, description="Keep advection")

    @model_validator(mode="after")
    def height_matches_grid(self) -> "PEConfig":
        """The vertical period is 2h."""
        if not np.isclose(self.grid.Lz, 2.0 * self.h):
            msg = f"PE grid needs Lz = 2h = {2.0 * self.h}, got {self.grid.Lz}"
            raise ValueError(msg)
        return self

    @property
    def has_temperature(self) -> bool:
        return self.variant is not PEVariant.NOTEMP

    @property
    def hydrostatic_sign(self) -> float:
        """s in d_z p = s T."""
        return 1.0 if self.variant in (PEVariant.FV, PEVariant.FH) else -1.0

    @property
    def weights(self) -> tuple[float, ...]:
        return (1.0, 1.0, self.h) if self.has_temperature else (1.0, 1.0)


@dataclass(frozen=True)
class PEState:
    """PE snapshot; w, p_surface and p are recomputed from (v, T)."""

    v1: SpectralField
    v2: SpectralField
    T: SpectralField | None
    w: SpectralField
    p_surface: SpectralField
    p: SpectralField
    t: float = 0.0
    step: int = 0
    forcing: Fields | None = None
    forcing_prev: Fields | None = None

    @property
    def prognostic(self) -> Fields:
        return (self.v1, self.v2) if self.T is None else (self.v1, self.v2, self.T)

    @property
    def velocity(self) -> Fields:
        return (self.v1, self.v2, self.w)


@dataclass(frozen=True)
class AuxFields:
    """u = d_z v, theta = grad_H^perp . v, eta = div_H v + int T - column mean of int T."""

    u_aux: tuple[SpectralField, SpectralField]
    theta_aux: SpectralField
    eta_aux: SpectralField


def recover_w(v: tuple[SpectralField, SpectralField]) -> SpectralField:
    """w = -integral_{-h}^z div_H v.

    Raises:
        ConstraintViolationError: If integral_{-h}^h div_H v dz does not vanish
    """
    div = divergence_h(*v)
    plane = div.coeffs[:, :, 0]
    scale = max(1.0, float(np.abs(div.coeffs).max()))
    if float(np.abs(plane).max()) > GAUGE_TOLERANCE * scale:
        msg = f"barotropic constraint violated: column divergence {np.abs(plane).max():.3e}"
        raise ConstraintViolationError(msg)
    grid = div.grid
    assert isinstance(grid, Grid3)
    return project_symmetry(-vertical_integral(div, lower=-grid.half_height), SymmetryClass.ODD)


def temperature_integral(T: SpectralField) -> SpectralField:
    """integral_{-h}^z T, even in z for odd T."""
    grid = T.grid
    assert isinstance(grid, Grid3)
    return vertical_integral(T, lower=-grid.half_height)


def _remove_mean(f: SpectralField) -> SpectralField:
    return f - f.mean


def _forcing_parts(fields: Fields, cfg: PEConfig) -> tuple[Fields, SpectralField, SpectralField]:
    """Projected forcing, surface pressure and full pressure at a state."""
    v1, v2 = fields[0], fields[1]
    T = fields[2] if cfg.has_temperature else None
    w = recover_w((v1, v2))
    transported = [v1, v2] if T is None else [v1, v2, T]
    if cfg.nonlinear:
        advective = advection_many((v1, v2, w), transported)
    else:
        advective = [SpectralField.zeros(f.grid, f.sym) for f in transported]

    f1 = -advective[0] + cfg.f0 * v2
    f2 = -advective[1] - cfg.f0 * v1
    integral = None
    if T is not None:
        integral = temperature_integral(T)
        gx, gy = gradient_h(integral)
        f1 = f1 - cfg.hydrostatic_sign * gx
        f2 = f2 - cfg.hydrostatic_sign * gy
    (f1, f2), potential = barotropic_project((f1, f2))
    forcing: Fields = (
        project_symmetry(f1, SymmetryClass.EVEN),
        project_symmetry(f2, SymmetryClass.EVEN),
    )
    if T is not None:
        f_T = -advective[2] - w / cfg.h
        forcing = (*forcing, project_symmetry(f_T, SymmetryClass.ODD))

    p_surface = _remove_mean(potential)
    p = extend_plane(p_surface, cfg.grid)
    if integral is not None:
        p = p + cfg.hydrostatic_sign * integral
    return forcing, p_surface, project_symmetry(_remove_mean(p), SymmetryClass.EVEN)


def _forcing(fields: Fields, cfg: PEConfig) -> Fields:
    return _forcing_parts(fields, cfg)[0]


def _project(fields: Fields) -> Fields:
    (v1, v2), _ = barotropic_project((fields[0], fields[1]))
    out: Fields = (
        project_symmetry(v1, SymmetryClass.EVEN),
        project_symmetry(v2, SymmetryClass.EVEN),
    )
    if len(fields) == 3:
        out = (*out, project_symmetry(fields[2], SymmetryClass.ODD))
    return out


def variant_symbols(cfg: PEConfig) -> tuple[np.ndarray, ...]:
    """Dissipation symbols (v1, v2[, T]) selected by the variant."""
    full_v, vertical_T = _VARIANT_OPERATORS[cfg.variant]
    v_symbol = laplacian_symbol(cfg.grid, 1.0, 1.0 if full_v else 0.0)
    if not cfg.has_temperature:
        return (v_symbol, v_symbol)
    if vertical_T:
        t_symbol = laplacian_symbol(cfg.grid, 0.0, 1.0)
    else:
        t_symbol = laplacian_symbol(cfg.grid, 1.0, 0.0)
    return (v_symbol, v_symbol, t_symbol)


def _complete(fields: Fields, cfg: PEConfig, t: float, step: int, forcing_prev: Fields | None) -> PEState:
    forcing, p_surface, p = _forcing_parts(fields, cfg)
    w = recover_w((fields[0], fields[1]))
    T = fields[2] if cfg.has_temperature else None
    return PEState(fields[0], fields[1], T, w, p_surface, p, t, step, forcing, forcing_prev)


def pe_initial_state(
    v0: tuple[SpectralField, SpectralField],
    cfg: PEConfig,
    T0: SpectralField | None = None,
    t: float = 0.0,
) -> PEState:
    """State from an even v0 satisfying the barotropic constraint and an odd T0.

    Raises:
        PreconditionError: Wrong symmetry, or T0 given to NOTEMP
        ConstraintViolationError: Barotropic constraint violated
    """
    fields: Fields = (
        require_symmetry(v0[0], SymmetryClass.EVEN, "v0[0]"),
        require_symmetry(v0[1], SymmetryClass.EVEN, "v0[1]"),
    )
    if cfg.has_temperature:
        T = SpectralField.zeros(cfg.grid, SymmetryClass.ODD) if T0 is None else T0
        fields = (*fields, require_symmetry(T, SymmetryClass.ODD, "T0"))
    elif T0 is not None:
        msg = "NOTEMP variant takes no temperature"
        raise PreconditionError(msg)
    logger.info(
        "variant=<%s>, h=<%s>, f0=<%s>, grid=<%s> | primitive equations initialized",
        cfg.variant.value,
        cfg.h,
        cfg.f0,
        cfg.grid.sizes,
    )
    return _complete(fields, cfg, t, 0, None)


def recover_pressure(state: PEState, cfg: PEConfig) -> tuple[SpectralField, SpectralField]:
    """(p_surface, p) with p = p_surface + s integral_{-h}^z T, both zero-mean."""
    _, p_surface, p = _forcing_parts(state.prognostic, cfg)
    return p_surface, p


def pe_step(state: PEState, cfg: PEConfig) -> PEState:
    """Advance one CN/AB2 step of the selected variant.

    Raises:
        StepRejectedError: CFL violation
        BlowUpError: Non-finite state
    """
    fields = state.prognostic
    check_finite(fields, state.t)
    check_cfl(state.velocity, cfg.grid.spacing, cfg.dt, cfg.cfl)
    f_now = state.forcing if state.forcing is not None else _forcing(fields, cfg)
    new, _ = cnab2_step(
        fields,
        variant_symbols(cfg),
        cfg.dt,
        partial(_forcing, cfg=cfg),
        f_now,
        state.forcing_prev,
        _project,
    )
    check_finite(new, state.t + cfg.dt)
    logger.debug("variant=<%s>, step=<%d> | pe step", cfg.variant.value, state.step + 1)
    return _complete(new, cfg, state.t + cfg.dt, state.step + 1, f_now)


def aux_fields(state: PEState, cfg: PEConfig) -> AuxFields:
    """Derived fields u, theta and eta of a state."""
    u_aux = (derivative(state.v1, Axis.Z), derivative(state.v2, Axis.Z))
    theta_aux = curl_h(state.v1, state.v2)
    eta_aux = divergence_h(state.v1, state.v2)
    if state.T is not None:
        integral = temperature_integral(state.T)
        column = extend_plane(z_mean_plane(integral), cfg.grid)
        eta_aux = eta_aux + project_symmetry(integral - column, SymmetryClass.EVEN)
    return AuxFields(u_aux, theta_aux, eta_aux)


def lq_growth_report(
    states: Sequence[PEState], q_list: Sequence[float] = DEFAULT_LQ_EXPONENTS
) -> dict[float, float]:
    """R(q) = sup_t ||v||_q / ((1 + ||v0||_q) sqrt(q)) over sampled states.

    Args:
        states: Sampled states, the first being the initial one
        q_list: Exponents in [2, 64]

    Raises:
        PreconditionError: If no states are given
        InvalidNormError: If an exponent is outside [2, 64]
    """
    if not states:
        msg = "empty trajectory"
        raise PreconditionError(msg)
    report: dict[float, float] = {}
    for q in q_list:
        if not 2 <= q <= 64:
            msg = f"growth exponents must lie in [2, 64], got {q}"
            raise InvalidNormError(msg)
        norms = [vector_norm((s.v1, s.v2), NormKind.LQ, q) for s in states]
        report[float(q)] = max(norms) / ((1.0 + norms[0]) * np.sqrt(q))
    return report


def discontinuous_ic(
    a: tuple[float, float],
    delta: float,
    eta_w: float,
    sigma: tuple[float, float],
    cfg: PEConfig,
) -> PEState:
    """NOTEMP state with v0 = a |z|^delta + sigma 1{|z| < eta_w}, sampled on the grid.

    Data depend on z only, so the barotropic constraint holds trivially.

    Raises:
        ConfigError: If delta <= 0 or eta_w is outside (0, h)
    """
    if not delta > 0:
        msg = f"delta={delta} out of range"
        raise ConfigError(msg, key="ic.delta", constraint="delta > 0")
    if not 0 < eta_w < cfg.h:
        msg = f"eta={eta_w} out of range for h={cfg.h}"
        raise ConfigError(msg, key="ic.eta", constraint="0 < eta < h")
    if cfg.has_temperature:
        cfg = cfg.model_copy(update={"variant": PEVariant.NOTEMP})
    depth = np.abs(cfg.grid.z_centered())
    step = (depth < eta_w).astype(float)
    v = tuple(
        SpectralField.from_physical(cfg.grid, ai * depth**delta + si * step, SymmetryClass.EVEN)
        for ai, si in zip(a, sigma, strict=True)
    )
    return pe_initial_state((v[0], v[1]), cfg)


def barotropic_residual(state: PEState) -> float:
    """Max of the column mean of div_H v."""
    return norm(z_mean_plane(divergence_h(state.v1, state.v2)), NormKind.LINF)


def pe_diagnostics(state: PEState, cfg: PEConfig) -> StepDiagnostics:
    fields = state.prognostic
    forcing = state.forcing if state.forcing is not None else _forcing(fields, cfg)
    div = divergence_h(state.v1, state.v2) + derivative(state.w, Axis.Z)
    w_top = float(np.abs(state.w.physical()[:, :, cfg.grid.N3 // 2]).max())
    extras = {
        "barotropic_residual": barotropic_residual(state),
        "w_boundary": w_top,
        "tail_fraction": tail_fraction((state.v1, state.v2)),
    }
    for q in DEFAULT_LQ_EXPONENTS:
        extras[f"v_L{q:g}"] = vector_norm((state.v1, state.v2), NormKind.LQ, q)
    return StepDiagnostics(
        step=state.step,
        t=state.t,
        energy=weighted_energy(fields, cfg.weights),
        dissipation=weighted_dissipation(fields, variant_symbols(cfg), cfg.weights),
        exchange=weighted_work(fields, forcing, cfg.weights),
        divergence_residual=norm(div, NormKind.LINF),
        symmetry_residual=max(symmetry_residual(f) for f in (*fields, state.w, state.p)),
        max_speed=vector_norm(state.velocity, NormKind.LINF),
        extras=extras,
    )


class PESolver:
    """Harness adapter for the primitive equations."""

    system = SystemTag.PE.value

    def __init__(self, cfg: PEConfig) -> None:
        self.cfg = cfg

    def initial_state(
        self, v0: tuple[SpectralField, SpectralField], T0: SpectralField | None = None
    ) -> PEState:
        return pe_initial_state(v0, self.cfg, T0)

    def step(self, state: PEState) -> PEState:
        return pe_step(state, self.cfg)

    def diagnose(self, state: PEState) -> StepDiagnostics:
        return pe_diagnostics(state, self.cfg)

    def fields(self, state: PEState) -> dict[str, SpectralField]:
        named = {"v1": state.v1, "v2": state.v2}
        if state.T is not None:
            named["T"] = state.T
        named.update({"w": state.w, "p": state.p})
        return named

    def restore(self, fields: dict[str, SpectralField], t: float, step: int) -> PEState:
        prognostic: Fields = (
            require_symmetry(fields["v1"], SymmetryClass.EVEN, "v1"),
            require_symmetry(fields["v2"], SymmetryClass.EVEN, "v2"),
        )
        if self.cfg.has_temperature:
            prognostic = (*prognostic, require_symmetry(fields["T"], SymmetryClass.ODD, "T"))
        return _complete(prognostic, self.cfg, t, step, None)
