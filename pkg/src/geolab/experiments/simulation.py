"""Drive a solver over a time interval and record diagnostics.

Usage:
    solver = build_solver(run_config)
    state = build_initial_state(solver, "taylor_green")
    trajectory = run_simulation(solver, state, t_end=0.5, sample_interval=5)
"""

import time
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

from geolab.experiments.initial_conditions import AnySolver, AnyState, build_initial_state
from geolab.shared.logging import get_logger
from geolab.shared.models import RunConfig, StepDiagnostics, SystemTag
from geolab.solvers.pe import PEConfig, PESolver
from geolab.solvers.sns import SNSConfig, SNSSolver
from geolab.solvers.tam import TAMConfig, TAMSolver
from geolab.spectral.grid import Grid2, Grid3

logger = get_logger(__name__)

StepHook = Callable[[AnySolver, AnyState], None]


@dataclass
class Trajectory:
    """Sampled states and diagnostics of one run.

    Attributes:
        system: System tag
        diagnostics: One entry per sample, in time order
        states: Sampled states (same order), empty when not kept
        dt: Time step
        steps: Steps taken
        runtime_s: Wall-clock seconds (not part of any machine-format output)
    """

    system: str
    dt: float
    diagnostics: list[StepDiagnostics] = field(default_factory=list)
    states: list[Any] = field(default_factory=list)
    steps: int = 0
    runtime_s: float = 0.0

    @property
    def times(self) -> list[float]:
        return [d.t for d in self.diagnostics]

    @property
    def final_state(self) -> Any:
        return self.states[-1] if self.states else None

    @property
    def max_divergence_residual(self) -> float:
        return max((d.divergence_residual for d in self.diagnostics), default=0.0)

    @property
    def max_symmetry_residual(self) -> float:
        return max((d.symmetry_residual for d in self.diagnostics), default=0.0)

    def extra_series(self, key: str) -> list[float]:
        return [d.extras[key] for d in self.diagnostics if key in d.extras]


def step_count(t_end: float, dt: float) -> int:
    """Number of steps reaching t_end (rounded to the nearest step)."""
    return max(0, int(round(t_end / dt)))


def run_simulation(
    solver: AnySolver,
    state: AnyState,
    t_end: float,
    sample_interval: int = 5,
    keep_states: bool = True,
    on_sample: StepHook | None = None,
) -> Trajectory:
    """Advance a state to t_end, sampling every sample_interval steps and at the end.

    Args:
        solver: Configured solver
        state: Initial state (its t may be nonzero after a resume)
        t_end: Final time
        sample_interval: Steps between samples
        keep_states: Keep sampled states (needed for error measurement)
        on_sample: Called with each sampled state (checkpointing)

    Returns:
        Trajectory with diagnostics at every sample

    Raises:
        StepRejectedError, BlowUpError: Propagated from the solver
    """
    dt = solver.cfg.dt
    n_steps = step_count(t_end - state.t, dt)
    trajectory = Trajectory(system=solver.system, dt=dt)
    started = time.perf_counter()
    logger.info(
        "system=<%s>, steps=<%d>, dt=<%s> | starting run", solver.system, n_steps, dt
    )

    def record(current: AnyState) -> None:
        trajectory.diagnostics.append(solver.diagnose(current))
        if keep_states:
            trajectory.states.append(current)
        if on_sample is not None:
            on_sample(solver, current)

    record(state)
    for n in range(1, n_steps + 1):
        state = solver.step(state)
        if n % sample_interval == 0 or n == n_steps:
            record(state)
    trajectory.steps = n_steps
    trajectory.runtime_s = time.perf_counter() - started
    logger.info(
        "system=<%s>, steps=<%d>, max_divergence=<%.3e> | run finished",
        solver.system,
        n_steps,
        trajectory.max_divergence_residual,
    )
    return trajectory


def build_solver(run: RunConfig) -> AnySolver:
    """Solver for a validated run configuration."""
    g = run.grid
    phys = run.physics
    integ = run.integrator
    tag = run.system.system
    common = {"dt": integ.dt, "t_end": integ.t_end, "cfl": integ.cfl}
    if tag is SystemTag.SNS:
        assert g.N3 is not None and phys.epsilon is not None
        grid3 = Grid3(L1=g.L1, L2=g.L2, Lz=2.0, N1=g.N1, N2=g.N2, N3=g.N3)
        return SNSSolver(
            SNSConfig(grid=grid3, epsilon=phys.epsilon, nonlinear=phys.nonlinear, **common)
        )
    if tag is SystemTag.PE:
        assert g.N3 is not None
        grid3 = Grid3(L1=g.L1, L2=g.L2, Lz=2.0 * phys.h, N1=g.N1, N2=g.N2, N3=g.N3)
        return PESolver(
            PEConfig(
                grid=grid3,
                h=phys.h,
                f0=phys.f0,
                variant=run.system.variant,
                nonlinear=phys.nonlinear,
                **common,
            )
        )
    grid2 = Grid2(L1=g.L1, L2=g.L2, N1=g.N1, N2=g.N2)
    return TAMSolver(
        TAMConfig(
            grid=grid2,
            alpha=phys.alpha,
            Qbar=phys.Qbar,
            qhat=phys.qhat,
            epsilon=phys.epsilon,
            limit=run.system.limit,
            mu=phys.mu,
            H_height=phys.H,
            precipitation=phys.precipitation,
            **common,
        )
    )


def run_from_config(
    run: RunConfig,
    seed: int | None = None,
    initial: AnyState | None = None,
    on_sample: StepHook | None = None,
) -> tuple[AnySolver, Trajectory]:
    """Build the solver and initial state of a run config and integrate to t_end.

    Args:
        run: Validated run configuration
        seed: Overrides the "seed" parameter of the initial condition
        initial: Resume from this state instead of generating the initial condition
        on_sample: Hook called at each sample

    Returns:
        (solver, trajectory)
    """
    solver = build_solver(run)
    if initial is None:
        params = dict(run.ic.params)
        if seed is not None:
            params["seed"] = seed
        initial = build_initial_state(solver, run.ic.name, params)
    trajectory = run_simulation(
        solver,
        initial,
        run.integrator.t_end,
        run.integrator.sample_interval,
        keep_states=False,
        on_sample=on_sample,
    )
    return solver, trajectory
