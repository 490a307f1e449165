"""Epsilon sweeps measuring the convergence rate of the two singular limits.

Hydrostatic limit: scaled Navier-Stokes runs at decreasing aspect ratio are
compared with one temperature-free primitive-equation reference run (f0 = 0,
h = 1) from the same horizontal velocity. Relaxation limit: relaxed tropical
atmosphere runs at decreasing relaxation time are compared with one run of
the constrained limit system.

Per-epsilon runs are independent and go through joblib; results come back in
epsilon order, so the reduction into the report is deterministic.

Usage:
    spec = sweep_from_preset("hydrostatic_default", workers=4)
    report = hydrostatic_limit_study(spec)
"""

import time
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import joblib
import numpy as np
from pydantic import ValidationError
from scipy.integrate import trapezoid

from geolab.experiments.budget import energy_budget
from geolab.experiments.fitting import FitError, fit_rate
from geolab.experiments.initial_conditions import build_initial_state
from geolab.experiments.simulation import run_simulation
from geolab.shared.config import get_config
from geolab.shared.errors import ConfigError
from geolab.shared.logging import get_logger
from geolab.shared.models import (
    PEVariant,
    RunStatus,
    StudyReport,
    StudyRow,
    StudyStatus,
    SweepKind,
    SweepSpec,
    SystemTag,
)
from geolab.solvers.integrators import BlowUpError, Fields, StepRejectedError
from geolab.solvers.pe import PEConfig, PESolver
from geolab.solvers.sns import SNSConfig, SNSSolver, SNSState
from geolab.solvers.tam import TAMConfig, TAMSolver, TAMState
from geolab.spectral.field import SpectralField
from geolab.spectral.grid import Grid2, Grid3
from geolab.spectral.operators import inner, laplacian_symbol, symbol_energy

logger = get_logger(__name__)

HYDROSTATIC_RATE = 1.0
RELAXATION_RATE = 0.5


@dataclass
class _ErrorSeries:
    """Error samples of one run against the reference, keyed by shared step index."""

    times: list[float] = field(default_factory=list)
    l2: list[float] = field(default_factory=list)
    h1: list[float] = field(default_factory=list)
    gradient_sq: list[float] = field(default_factory=list)

    def add(self, t: float, l2_sq: float, gradient_sq: float = 0.0) -> None:
        self.times.append(t)
        self.l2.append(float(np.sqrt(l2_sq)))
        self.h1.append(float(np.sqrt(l2_sq + gradient_sq)))
        self.gradient_sq.append(gradient_sq)

    @property
    def sup_l2(self) -> float:
        return max(self.l2, default=0.0)

    @property
    def sup_h1(self) -> float:
        return max(self.h1, default=0.0)

    @property
    def gradient_integral(self) -> float:
        if len(self.times) < 2:
            return 0.0
        return float(trapezoid(self.gradient_sq, self.times))


def _weighted_difference(
    a: Fields, b: Fields, weights: tuple[float, ...], symbol: np.ndarray | None = None
) -> tuple[float, float]:
    """(sum w_i ||a_i - b_i||^2, sum w_i ||grad(a_i - b_i)||^2)."""
    l2_sq = 0.0
    gradient_sq = 0.0
    for x, y, w in zip(a, b, weights, strict=True):
        diff = x - y
        l2_sq += w * inner(diff, diff)
        if symbol is not None:
            gradient_sq += w * symbol_energy(diff, symbol)
    return l2_sq, gradient_sq


def _failed_row(epsilon: float, error: Exception, started: float) -> StudyRow:
    logger.warning("epsilon=<%s>, error=<%s> | run failed, excluding from fit", epsilon, error)
    return StudyRow(
        epsilon=epsilon,
        status=RunStatus.FAILED,
        included_in_fit=False,
        message=str(error),
        runtime_s=time.perf_counter() - started,
    )


def sweep_from_preset(name: str, **overrides: Any) -> SweepSpec:
    """SweepSpec from a named preset in scenarios.yaml, with the ic preset resolved.

    Raises:
        ConfigError: Unknown preset or invalid sweep
    """
    config = get_config()
    preset = config.get_sweep_preset(name)
    if not preset:
        msg = f"unknown sweep preset '{name}'"
        raise ConfigError(msg, key="sweep.preset")
    preset.update({k: v for k, v in overrides.items() if v is not None})
    ic = preset.get("ic")
    if isinstance(ic, str):
        resolved = config.get_ic_preset(ic)
        if not resolved:
            msg = f"unknown initial-condition preset '{ic}'"
            raise ConfigError(msg, key="sweep.ic")
        preset["ic"] = resolved
    try:
        return SweepSpec.model_validate(preset)
    except ValidationError as e:
        first = e.errors()[0]
        key = ".".join(str(part) for part in first["loc"])
        msg = first["msg"]
        raise ConfigError(msg, key=f"sweep.{key}" if key else "sweep") from e


def _lengths(spec: SweepSpec, system: SystemTag) -> tuple[float, float]:
    if spec.lengths is not None:
        return spec.lengths
    defaults = get_config().get_system_defaults(system.value)
    return float(defaults["L1"]), float(defaults["L2"])


def _cfl(system: SystemTag) -> float:
    return float(get_config().get_system_defaults(system.value).get("cfl", 0.5))


def _run_parallel(task: Callable[..., Any], epsilons: list[float], workers: int, **kwargs: Any) -> list[Any]:
    """Run task(eps, **kwargs) for every epsilon; results in input order."""
    if workers == 1:
        return [task(eps, **kwargs) for eps in epsilons]
    # numpy and scipy.fft release the GIL in their kernels
    return joblib.Parallel(n_jobs=workers, prefer="threads")(
        joblib.delayed(task)(eps, **kwargs) for eps in epsilons
    )


def _assemble(
    kind: SweepKind,
    rows: list[StudyRow],
    expected_slope: float,
    reference: str,
    cross_check: dict[str, float],
    started: float,
) -> StudyReport:
    """Fit the rate over successful rows and build the report."""
    ok = [r for r in rows if r.status is RunStatus.OK]
    slope = None
    residual = None
    if ok and all(r.error == 0.0 for r in ok):
        status = StudyStatus.EXACT_ZERO
        logger.info("kind=<%s> | all errors vanish, slope undefined", kind.value)
    else:
        try:
            fit = fit_rate([r.error or 0.0 for r in ok], [r.epsilon for r in ok])
        except FitError as e:
            logger.warning("kind=<%s>, error=<%s> | rate fit failed", kind.value, e)
            status = StudyStatus.FIT_FAILED
        else:
            status = StudyStatus.OK
            slope = fit.slope
            residual = fit.residual
            excluded = set(fit.excluded)
            rows = [
                r.model_copy(update={"included_in_fit": False}) if r.epsilon in excluded else r
                for r in rows
            ]
    report = StudyReport(
        kind=kind,
        rows=rows,
        slope=slope,
        residual=residual,
        expected_slope=expected_slope,
        status=status,
        reference=reference,
        cross_check=cross_check,
        runtime_s=time.perf_counter() - started,
    )
    logger.info(
        "kind=<%s>, status=<%s>, slope=<%s>, expected=<%s> | sweep finished",
        kind.value,
        status.value,
        slope,
        expected_slope,
    )
    return report


# -- hydrostatic limit ---------------------------------------------------------


def _hydrostatic_run(
    epsilon: float,
    grid: Grid3,
    v0: tuple[SpectralField, SpectralField],
    reference: dict[int, Fields],
    spec: SweepSpec,
    cfl: float,
) -> StudyRow:
    """One SNS run; errors ||(V, eps W)|| against the reference at shared samples."""
    started = time.perf_counter()
    weights = (1.0, 1.0, epsilon**2)
    symbol = laplacian_symbol(grid)
    series = _ErrorSeries()

    def on_sample(_: Any, state: SNSState) -> None:
        ref = reference.get(state.step)
        if ref is not None:
            series.add(state.t, *_weighted_difference(state.velocity, ref, weights, symbol))

    logger.info("epsilon=<%s> | hydrostatic sweep run starting", epsilon)
    try:
        solver = SNSSolver(
            SNSConfig(
                grid=grid,
                epsilon=epsilon,
                dt=spec.dt,
                t_end=spec.t_end,
                cfl=cfl,
                nonlinear=spec.physics.nonlinear,
            )
        )
        trajectory = run_simulation(
            solver,
            solver.initial_state(v0),
            spec.t_end,
            spec.sample_interval,
            keep_states=False,
            on_sample=on_sample,
        )
    except (StepRejectedError, BlowUpError) as e:
        return _failed_row(epsilon, e, started)
    return StudyRow(
        epsilon=epsilon,
        error=series.sup_l2,
        error_h1=series.sup_h1,
        dissipation_integral=series.gradient_integral,
        hydrostatic_residual=max(trajectory.extra_series("hydrostatic_residual"), default=0.0),
        budget_residual=energy_budget(trajectory.diagnostics).max_abs,
        runtime_s=time.perf_counter() - started,
    )


def hydrostatic_limit_study(spec: SweepSpec) -> StudyReport:
    """Sweep the aspect ratio of the scaled Navier-Stokes system.

    The reference is the temperature-free primitive-equation run with f0 = 0
    and h = 1 on the same grid and time step. Each SNS run starts from the
    same horizontal velocity v0 with w0 = -integral_0^z div_H v0.

    Args:
        spec: Hydrostatic sweep

    Returns:
        StudyReport with sup-in-time L2 and H1 errors of (V, eps W), the time
        integral of ||grad(V, eps W)||^2, the sup-in-time ||d_z p|| per epsilon and
        the fitted slope (expected 1)

    Raises:
        ConfigError: Wrong sweep kind or unknown initial condition
        ConstraintViolationError: v0 violates the barotropic or zero-mean constraint
    """
    if spec.kind is not SweepKind.HYDROSTATIC:
        msg = f"expected a hydrostatic sweep, got {spec.kind.value}"
        raise ConfigError(msg, key="sweep.kind")
    started = time.perf_counter()
    N1, N2, N3 = spec.resolution
    L1, L2 = _lengths(spec, SystemTag.SNS)
    grid = Grid3(L1=L1, L2=L2, Lz=2.0, N1=N1, N2=N2, N3=N3)
    cfl = _cfl(SystemTag.SNS)

    reference_solver = PESolver(
        PEConfig(
            grid=grid,
            h=1.0,
            f0=0.0,
            variant=PEVariant.NOTEMP,
            dt=spec.dt,
            t_end=spec.t_end,
            cfl=cfl,
            nonlinear=spec.physics.nonlinear,
        )
    )
    initial = build_initial_state(reference_solver, spec.ic.name, spec.ic.params)
    reference: dict[int, Fields] = {}

    def keep(_: Any, state: Any) -> None:
        reference[state.step] = state.velocity

    run_simulation(
        reference_solver, initial, spec.t_end, spec.sample_interval, keep_states=False, on_sample=keep
    )
    logger.info("samples=<%d> | hydrostatic reference computed", len(reference))

    rows = _run_parallel(
        _hydrostatic_run,
        list(spec.epsilons),
        spec.workers,
        grid=grid,
        v0=(initial.v1, initial.v2),
        reference=reference,
        spec=spec,
        cfl=cfl,
    )
    residuals = [r.hydrostatic_residual for r in rows if r.hydrostatic_residual is not None]
    cross_check: dict[str, float] = {}
    if len(residuals) >= 2 and residuals[0] > 0:
        cross_check["hydrostatic_residual_ratio"] = residuals[-1] / residuals[0]
        cross_check["hydrostatic_residual_decreasing"] = float(
            all(b < a for a, b in zip(residuals, residuals[1:], strict=False))
        )
    return _assemble(
        SweepKind.HYDROSTATIC,
        rows,
        HYDROSTATIC_RATE,
        "pe NOTEMP, f0=0, h=1",
        cross_check,
        started,
    )


# -- relaxation limit ----------------------------------------------------------


@dataclass
class _RelaxationRun:
    row: StudyRow
    samples: dict[int, Fields] = field(default_factory=dict)


def _tam_config(grid: Grid2, spec: SweepSpec, cfl: float, epsilon: float | None) -> TAMConfig:
    phys = spec.physics
    return TAMConfig(
        grid=grid,
        alpha=phys.alpha,
        Qbar=phys.Qbar,
        qhat=phys.qhat,
        epsilon=epsilon,
        limit=epsilon is None,
        mu=phys.mu,
        H_height=phys.H,
        dt=spec.dt,
        t_end=spec.t_end,
        cfl=cfl,
        precipitation=phys.precipitation,
    )


def _relaxation_run(
    epsilon: float,
    grid: Grid2,
    initial: TAMState,
    reference: dict[int, Fields],
    spec: SweepSpec,
    cfl: float,
    keep_for: frozenset[float],
) -> _RelaxationRun:
    """One relaxed run; 6-component L2 error against the limit run at shared samples."""
    started = time.perf_counter()
    weights = (1.0,) * 6
    series = _ErrorSeries()
    samples: dict[int, Fields] = {}

    def on_sample(_: Any, state: TAMState) -> None:
        ref = reference.get(state.step)
        if ref is not None:
            series.add(state.t, _weighted_difference(state.fields, ref, weights)[0])
        if epsilon in keep_for:
            samples[state.step] = state.fields

    logger.info("epsilon=<%s> | relaxation sweep run starting", epsilon)
    try:
        solver = TAMSolver(_tam_config(grid, spec, cfl, epsilon))
        start = solver.initial_state(
            (initial.u1, initial.u2), (initial.v1, initial.v2), initial.Te, initial.qe
        )
        trajectory = run_simulation(
            solver, start, spec.t_end, spec.sample_interval, keep_states=False, on_sample=on_sample
        )
    except (StepRejectedError, BlowUpError) as e:
        return _RelaxationRun(_failed_row(epsilon, e, started))
    sink = trajectory.extra_series("q_plus_sq_over_eps")
    q_plus_integral = float(trapezoid(sink, trajectory.times)) if len(sink) > 1 else 0.0
    row = StudyRow(
        epsilon=epsilon,
        error=series.sup_l2,
        q_plus_integral=q_plus_integral,
        budget_residual=energy_budget(trajectory.diagnostics).max_abs,
        runtime_s=time.perf_counter() - started,
    )
    return _RelaxationRun(row, samples)


def _sup_difference(a: dict[int, Fields], b: dict[int, Fields]) -> float:
    weights = (1.0,) * 6
    gaps = [
        float(np.sqrt(_weighted_difference(a[step], b[step], weights)[0]))
        for step in sorted(a.keys() & b.keys())
    ]
    return max(gaps, default=0.0)


def relaxation_limit_study(spec: SweepSpec) -> StudyReport:
    """Sweep the relaxation time of the tropical atmosphere model.

    The reference is the limit system (q_e <- min(q_e, 0)) on the same grid
    and time step, started from the same state with q_e <= 0.

    Args:
        spec: Relaxation sweep

    Returns:
        StudyReport with the sup-in-time L2 error of (u, v, T_e, q_e), the
        integral of ||q_e^+||^2 / eps per epsilon, the fitted slope (expected
        1/2) and a cross-check of the finest run against the limit run and
        against the next-finest run

    Raises:
        ConfigError: Wrong sweep kind, unknown initial condition or q_e > 0
    """
    if spec.kind is not SweepKind.RELAXATION:
        msg = f"expected a relaxation sweep, got {spec.kind.value}"
        raise ConfigError(msg, key="sweep.kind")
    started = time.perf_counter()
    N1, N2 = spec.resolution
    L1, L2 = _lengths(spec, SystemTag.TAM)
    grid = Grid2(L1=L1, L2=L2, N1=N1, N2=N2)
    cfl = _cfl(SystemTag.TAM)

    limit_solver = TAMSolver(_tam_config(grid, spec, cfl, None))
    initial = build_initial_state(limit_solver, spec.ic.name, spec.ic.params)
    peak = float(initial.qe.physical().max())
    if peak > 0.0:
        msg = f"initial q_e must be <= 0, got max {peak:.3e}"
        raise ConfigError(msg, key="ic", constraint="q_e0 <= 0")
    reference: dict[int, Fields] = {}

    def keep(_: Any, state: TAMState) -> None:
        reference[state.step] = state.fields

    run_simulation(
        limit_solver, initial, spec.t_end, spec.sample_interval, keep_states=False, on_sample=keep
    )
    logger.info("samples=<%d> | limit reference computed", len(reference))

    epsilons = list(spec.epsilons)
    runs = _run_parallel(
        _relaxation_run,
        epsilons,
        spec.workers,
        grid=grid,
        initial=initial,
        reference=reference,
        spec=spec,
        cfl=cfl,
        keep_for=frozenset(epsilons[-2:]),
    )
    rows = [run.row for run in runs]
    cross_check: dict[str, float] = {}
    finest, next_finest = runs[-1], runs[-2]
    if finest.row.status is RunStatus.OK:
        cross_check["finest_vs_limit"] = finest.row.error or 0.0
        if next_finest.row.status is RunStatus.OK:
            cross_check["finest_vs_next"] = _sup_difference(finest.samples, next_finest.samples)
    integrals = [r.q_plus_integral for r in rows if r.q_plus_integral]
    if integrals:
        cross_check["q_plus_integral_spread"] = max(integrals) / min(integrals)
    return _assemble(
        SweepKind.RELAXATION,
        rows,
        RELAXATION_RATE,
        "tam limit system",
        cross_check,
        started,
    )
