#!/usr/bin/env python3
"""Acceptance checks for geolab.

Runs the desk-scale acceptance checks against the installed package and
prints a pass/fail report:
- Spectral exactness of derivatives and the anisotropic Poisson solve
- Incompressibility and z-symmetry over runs of every PE variant
- Temperature-free PE with z-independent data against a 2-D Navier-Stokes run
- Second-order convergence of the time integrator
- Exact q_e <= 0 in the limit-mode tropical atmosphere
- L^q growth shape of a horizontally viscous PE run
- Smoothing of discontinuous data
- Byte-identical machine output of repeated runs

Usage:
    python scripts/run_acceptance.py [--full] [--workers N]

Examples:
    # Fast checks (about a minute)
    python scripts/run_acceptance.py

    # Add the epsilon sweeps of both singular limits (several minutes)
    python scripts/run_acceptance.py --full --workers 4
"""

import argparse
import sys
import time
from collections.abc import Callable
from pathlib import Path

import numpy as np

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT / "src"))

from geolab.experiments.initial_conditions import build_initial_state  # noqa: E402
from geolab.experiments.simulation import run_simulation  # noqa: E402
from geolab.experiments.studies import (  # noqa: E402
    hydrostatic_limit_study,
    relaxation_limit_study,
    sweep_from_preset,
)
from geolab.interfaces.reports import diagnostics_csv, diagnostics_jsonl  # noqa: E402
from geolab.shared.models import PEVariant  # noqa: E402
from geolab.solvers.pe import PEConfig, PESolver, lq_growth_report  # noqa: E402
from geolab.solvers.sns import SNSConfig, SNSSolver  # noqa: E402
from geolab.solvers.tam import TAMConfig, TAMSolver  # noqa: E402
from geolab.spectral.field import Axis, SpectralField, derivative  # noqa: E402
from geolab.spectral.grid import Grid2, Grid3, SymmetryClass  # noqa: E402
from geolab.spectral.operators import poisson_aniso  # noqa: E402

# ANSI color codes for output
GREEN = "\033[92m"
RED = "\033[91m"
YELLOW = "\033[93m"
BOLD = "\033[1m"
RESET = "\033[0m"


class AcceptanceResult:
    """Outcome of one acceptance check."""

    def __init__(self, name: str, passed: bool, message: str = "", seconds: float = 0.0):
        self.name = name
        self.passed = passed
        self.message = message
        self.seconds = seconds

    def __str__(self) -> str:
        status = f"{GREEN}PASSED{RESET}" if self.passed else f"{RED}FAILED{RESET}"
        return f"{status} {self.name}: {self.message} ({self.seconds:.1f} s)"


def _pe(variant: PEVariant, n: int = 32, dt: float = 1e-3, f0: float = 1.0) -> PESolver:
    grid = Grid3(L1=1.0, L2=1.0, Lz=2.0, N1=n, N2=n, N3=n)
    return PESolver(PEConfig(grid=grid, h=1.0, f0=f0, variant=variant, dt=dt))


class AcceptanceRunner:
    """Runs the acceptance checks and collects their results."""

    def __init__(self, full: bool = False, workers: int = 1):
        self.full = full
        self.workers = workers
        self.results: list[AcceptanceResult] = []

    def _timed(self, name: str, check: Callable[[], tuple[bool, str]]) -> None:
        print(f"{BOLD}Running:{RESET} {name}")
        started = time.perf_counter()
        try:
            passed, message = check()
        except Exception as e:  # report and keep going
            passed, message = False, f"{type(e).__name__}: {e}"
        self.results.append(AcceptanceResult(name, passed, message, time.perf_counter() - started))

    def check_spectral_exactness(self) -> tuple[bool, str]:
        grid = Grid3(L1=1.0, L2=1.0, Lz=2.0, N1=32, N2=32, N3=32)
        x, y, _ = grid.coordinates()
        z = grid.z_centered()
        values = np.sin(2 * np.pi * x) * np.cos(4 * np.pi * y) * np.cos(np.pi * z)
        f = SpectralField.from_physical(grid, values, SymmetryClass.EVEN)
        exact = 2 * np.pi * np.cos(2 * np.pi * x) * np.cos(4 * np.pi * y) * np.cos(np.pi * z)
        d_err = float(np.abs(derivative(f, Axis.X).physical() - exact).max())
        lam = 0.5
        symbol = (2 * np.pi) ** 2 + (4 * np.pi) ** 2 + lam * np.pi**2
        p_err = float(np.abs(poisson_aniso(f, lam).physical() + values / symbol).max())
        worst = max(d_err, p_err)
        return worst < 1e-11, f"derivative {d_err:.2e}, poisson {p_err:.2e}"

    def check_incompressibility(self) -> tuple[bool, str]:
        worst_div = 0.0
        worst_sym = 0.0
        for variant in PEVariant:
            solver = _pe(variant)
            state = build_initial_state(solver, "random_smooth", {"seed": 3})
            trajectory = run_simulation(solver, state, 100 * solver.cfg.dt, 10, keep_states=False)
            worst_div = max(worst_div, trajectory.max_divergence_residual)
            worst_sym = max(worst_sym, trajectory.max_symmetry_residual)
        ok = worst_div < 1e-10 and worst_sym < 1e-10
        return ok, f"max divergence {worst_div:.2e}, max symmetry {worst_sym:.2e}"

    def check_dimensional_reduction(self) -> tuple[bool, str]:
        n = 16
        L = 2 * np.pi
        dt = 1e-3
        grid3 = Grid3(L1=L, L2=L, Lz=2.0, N1=n, N2=n, N3=8)
        grid2 = Grid2(L1=L, L2=L, N1=n, N2=n)
        x, y = grid2.coordinates()
        psi = np.sin(x) * np.cos(2 * y) + 0.5 * np.cos(x + y)
        psi_f = SpectralField.from_physical(grid2, psi)
        u1 = -derivative(psi_f, Axis.Y).physical()
        u2 = derivative(psi_f, Axis.X).physical()

        def column(values: np.ndarray) -> SpectralField:
            stacked = np.repeat(values[:, :, None], grid3.N3, axis=2)
            return SpectralField.from_physical(grid3, stacked, SymmetryClass.EVEN)

        pe = PESolver(PEConfig(grid=grid3, h=1.0, f0=0.0, variant=PEVariant.NOTEMP, dt=dt))
        tam = TAMSolver(TAMConfig(grid=grid2, epsilon=0.1, dt=dt))
        pe_state = pe.initial_state((column(u1), column(u2)))
        zero = SpectralField.zeros(grid2)
        tam_state = tam.initial_state(
            (SpectralField.from_physical(grid2, u1), SpectralField.from_physical(grid2, u2)),
            (zero, zero),
            zero,
            SpectralField.constant(grid2, -0.5),
        )
        gap = 0.0
        for _ in range(20):
            pe_state = pe.step(pe_state)
            tam_state = tam.step(tam_state)
            plane = pe_state.v1.physical()[:, :, 0]
            gap = max(gap, float(np.abs(plane - tam_state.u1.physical()).max()))
        return gap < 1e-10, f"max |v - u| over 20 steps {gap:.2e}"

    def check_integrator_order(self) -> tuple[bool, str]:
        grid = Grid3(L1=1.0, L2=1.0, Lz=2.0, N1=16, N2=16, N3=16)
        t_end = 0.05

        def terminal(dt: float) -> tuple[SpectralField, ...]:
            solver = SNSSolver(SNSConfig(grid=grid, epsilon=0.5, dt=dt, t_end=t_end))
            state = build_initial_state(solver, "taylor_green", {"amplitude": 1.0})
            for _ in range(round(t_end / dt)):
                state = solver.step(state)
            return state.velocity

        reference = terminal(0.01 / 8)

        def error(dt: float) -> float:
            result = terminal(dt)
            return max(float(np.abs(a.coeffs - b.coeffs).max()) for a, b in zip(result, reference, strict=True))

        coarse, fine = error(0.01), error(0.005)
        factor = coarse / fine if fine > 0 else float("inf")
        return 3.0 <= factor <= 5.0, f"error ratio under dt halving {factor:.2f}"

    def check_constraint_realization(self) -> tuple[bool, str]:
        grid = Grid2(L1=2 * np.pi, L2=2 * np.pi, N1=32, N2=32)
        solver = TAMSolver(TAMConfig(grid=grid, limit=True, dt=2e-3))
        state = build_initial_state(solver, "vortical", {"moisture_deficit": 0.01, "jet": 1.0})
        worst_q = -np.inf
        worst_residual = 0.0
        for _ in range(50):
            state = solver.step(state)
            worst_q = max(worst_q, float(state.qe.physical().max()))
            assert state.clip is not None
            worst_residual = max(worst_residual, state.clip.transport_residual)
        ok = worst_q <= 0.0 and worst_residual == 0.0
        return ok, f"max q_e {worst_q:.3e}, inactive-set residual {worst_residual:.1e}"

    def check_lq_growth(self) -> tuple[bool, str]:
        solver = _pe(PEVariant.HH, n=16, dt=2e-3)
        state = build_initial_state(solver, "random_smooth", {"seed": 11})
        trajectory = run_simulation(solver, state, 0.1, 5)
        ratios = lq_growth_report(trajectory.states, (4.0, 8.0, 16.0, 32.0))
        values = [ratios[q] for q in sorted(ratios)]
        ok = all(np.isfinite(values)) and all(b <= a * (1 + 1e-12) for a, b in zip(values, values[1:], strict=False))
        return ok, "R(q) = " + ", ".join(f"{v:.3f}" for v in values)

    def check_discontinuous_smoothing(self) -> tuple[bool, str]:
        solver = _pe(PEVariant.NOTEMP, n=32, dt=1e-3)
        state = build_initial_state(solver, "discontinuous", {"delta": 0.5, "sigma1": 0.01})
        trajectory = run_simulation(solver, state, 0.1, 10, keep_states=False)
        tail = trajectory.diagnostics[-1].extras["tail_fraction"]
        return tail < 1e-8, f"tail energy fraction at t=0.1 {tail:.2e}"

    def check_reproducibility(self) -> tuple[bool, str]:
        outputs = []
        for _ in range(2):
            solver = _pe(PEVariant.FV, n=16)
            state = build_initial_state(solver, "random_smooth", {"seed": 5})
            trajectory = run_simulation(solver, state, 0.02, 5, keep_states=False)
            outputs.append(diagnostics_csv(trajectory.diagnostics) + diagnostics_jsonl(trajectory.diagnostics))
        return outputs[0] == outputs[1], "machine output identical" if outputs[0] == outputs[1] else "outputs differ"

    def check_hydrostatic_sweep(self) -> tuple[bool, str]:
        report = hydrostatic_limit_study(sweep_from_preset("hydrostatic_default", workers=self.workers))
        slope_ok = report.slope is not None and 0.8 <= report.slope <= 1.2
        decreasing = report.cross_check.get("hydrostatic_residual_decreasing") == 1.0
        return slope_ok and decreasing, f"slope {report.slope}, d_z p decreasing: {decreasing}"

    def check_relaxation_sweep(self) -> tuple[bool, str]:
        report = relaxation_limit_study(sweep_from_preset("relaxation_default", workers=self.workers))
        slope_ok = report.slope is not None and 0.35 <= report.slope <= 0.65
        spread = report.cross_check.get("q_plus_integral_spread", float("inf"))
        return slope_ok and spread < 10.0, f"slope {report.slope}, q+ integral spread {spread:.2f}"

    def print_report(self) -> None:
        print(f"\n{BOLD}{'=' * 60}{RESET}")
        print(f"{BOLD}ACCEPTANCE REPORT{RESET}")
        print(f"{BOLD}{'=' * 60}{RESET}\n")
        for result in self.results:
            print(result)
        failed = sum(1 for r in self.results if not r.passed)
        print(f"\n{BOLD}{'=' * 60}{RESET}")
        if failed == 0:
            print(f"{GREEN}{BOLD}ALL {len(self.results)} CHECKS PASSED{RESET}")
        else:
            print(f"{RED}{BOLD}{failed} OF {len(self.results)} CHECKS FAILED{RESET}")
        print(f"{BOLD}{'=' * 60}{RESET}\n")

    def run(self) -> bool:
        """Run all checks.

        Returns:
            True if every check passed
        """
        self._timed("Spectral exactness", self.check_spectral_exactness)
        self._timed("Incompressibility and symmetry", self.check_incompressibility)
        self._timed("Dimensional reduction", self.check_dimensional_reduction)
        self._timed("Integrator order", self.check_integrator_order)
        self._timed("Constraint realization", self.check_constraint_realization)
        self._timed("Lq growth shape", self.check_lq_growth)
        self._timed("Discontinuous-data smoothing", self.check_discontinuous_smoothing)
        self._timed("Reproducibility", self.check_reproducibility)
        if self.full:
            self._timed("Hydrostatic limit sweep", self.check_hydrostatic_sweep)
            self._timed("Relaxation limit sweep", self.check_relaxation_sweep)
        else:
            print(f"{YELLOW}Skipping the epsilon sweeps (use --full){RESET}")
        self.print_report()
        return all(r.passed for r in self.results)


def main() -> None:
    parser = argparse.ArgumentParser(description="Run geolab acceptance checks")
    parser.add_argument("--full", action="store_true", help="Include the epsilon sweeps")
    parser.add_argument("--workers", type=int, default=1, help="Parallel per-epsilon runs")
    args = parser.parse_args()

    runner = AcceptanceRunner(full=args.full, workers=args.workers)
    ok = runner.run()
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
