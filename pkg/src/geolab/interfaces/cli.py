"""Command-line entry points.

Usage:
    geolab run-tam --config tam.cfg --out runs/tam
    geolab run-pe --config pe.cfg --resume runs/pe/final.geol
    geolab limit-hydrostatic --workers 4 --out runs/hydrostatic
    geolab limit-relaxation --config relaxation.cfg
    geolab diagnose runs/tam/final.geol

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 checkpoint or report I/O error.
"""

import argparse
import json
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from geolab.experiments.simulation import build_solver, run_from_config
from geolab.experiments.studies import (
    hydrostatic_limit_study,
    relaxation_limit_study,
    sweep_from_preset,
)
from geolab.interfaces.checkpoint import (
    Direction,
    checkpoint_io,
    read_checkpoint,
    solver_from_checkpoint,
    write_checkpoint,
)
from geolab.interfaces.config_parser import parse_config, parse_sweep_config
from geolab.interfaces.reports import diagnostics_human, emit_diagnostics, emit_report, study_human
from geolab.shared.config import get_config
from geolab.shared.errors import ConfigError, GeolabError, NumericalError, StorageError
from geolab.shared.logging import get_logger, set_log_level
from geolab.shared.models import StudyStatus, SweepKind, SweepSpec, SystemTag
from geolab.spectral.field import symmetry_residual

logger = get_logger(__name__)

_RUN_COMMANDS = {"run-sns": SystemTag.SNS, "run-pe": SystemTag.PE, "run-tam": SystemTag.TAM}
_LIMIT_COMMANDS = {
    "limit-hydrostatic": (SweepKind.HYDROSTATIC, "hydrostatic_default", hydrostatic_limit_study),
    "limit-relaxation": (SweepKind.RELAXATION, "relaxation_default", relaxation_limit_study),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geolab",
        description="Pseudo-spectral runs and singular-limit convergence studies",
    )
    parser.add_argument(
        "--log-level",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        type=str.upper,
        help="Override GEOLAB_LOG_LEVEL for this invocation",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    for name, system in _RUN_COMMANDS.items():
        run = commands.add_parser(name, help=f"Integrate the {system.value} system")
        run.add_argument("--config", required=True, type=Path, help="Run config (key=value or YAML)")
        run.add_argument("--resume", type=Path, help="Continue from this checkpoint")
        run.add_argument("--out", type=Path, help="Output directory (default: [output] dir)")
        run.add_argument("--seed", type=int, help="Seed of the initial-condition generator")

    for name, (kind, preset, _) in _LIMIT_COMMANDS.items():
        limit = commands.add_parser(name, help=f"Epsilon sweep of the {kind.value} limit")
        limit.add_argument("--config", type=Path, help=f"Sweep config (default: preset {preset})")
        limit.add_argument("--out", type=Path, help="Output directory (default: GEOLAB_OUTPUT_DIR)")
        limit.add_argument("--workers", type=int, help="Parallel per-epsilon runs")
        limit.add_argument("--seed", type=int, help="Seed of the initial-condition generator")

    diagnose = commands.add_parser("diagnose", help="Recompute invariant monitors on a checkpoint")
    diagnose.add_argument("checkpoint", type=Path, help="Checkpoint file")
    diagnose.add_argument("--out", type=Path, help="Also write the diagnostics as JSON here")
    return parser


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as e:
        msg = f"cannot read config {path}: {e}"
        raise StorageError(msg) from e
    except UnicodeDecodeError as e:
        msg = f"config {path} is not UTF-8: {e}"
        raise ConfigError(msg) from e


def run_command(system: SystemTag, args: argparse.Namespace) -> int:
    """run-sns / run-pe / run-tam."""
    run = parse_config(_read_text(args.config))
    if run.system.system is not system:
        msg = f"config is for {run.system.system.value}, command runs {system.value}"
        raise ConfigError(msg, key="system.system")
    out_dir = args.out or Path(run.output.dir)
    solver = build_solver(run)
    initial = None
    if args.resume is not None:
        initial = checkpoint_io(args.resume, Direction.READ, solver)

    every = run.output.checkpoint_every
    last: dict[str, Any] = {}

    def on_sample(solver: Any, state: Any) -> None:
        last["state"] = state
        if every and state.step and state.step % every == 0:
            write_checkpoint(out_dir / f"checkpoint_{state.step:08d}.geol", solver, state)

    _, trajectory = run_from_config(run, seed=args.seed, initial=initial, on_sample=on_sample)
    write_checkpoint(out_dir / "final.geol", solver, last["state"])
    emit_diagnostics(trajectory, run.output.formats, out_dir)
    print(diagnostics_human(trajectory), end="")
    return 0


def _sweep_spec(kind: SweepKind, preset: str, args: argparse.Namespace) -> SweepSpec:
    if args.config is not None:
        spec = parse_sweep_config(_read_text(args.config), kind)
    else:
        spec = sweep_from_preset(preset)
    workers = args.workers if args.workers is not None else get_config().settings.sweep_workers
    update: dict[str, Any] = {"workers": workers}
    if args.seed is not None:
        update["ic"] = spec.ic.model_copy(update={"params": {**spec.ic.params, "seed": args.seed}})
    return spec.model_copy(update=update)


def limit_command(command: str, args: argparse.Namespace) -> int:
    """limit-hydrostatic / limit-relaxation."""
    kind, preset, study = _LIMIT_COMMANDS[command]
    spec = _sweep_spec(kind, preset, args)
    if spec.workers < 1:
        msg = f"workers={spec.workers}"
        raise ConfigError(msg, key="workers", constraint="workers >= 1")
    report = study(spec)
    out_dir = args.out or Path(get_config().settings.output_dir)
    emit_report(report, out_dir=out_dir)
    print(study_human(report), end="")
    if report.status is StudyStatus.FIT_FAILED:
        msg = "convergence rate could not be fitted"
        raise NumericalError(msg)
    return 0


def diagnose_command(args: argparse.Namespace) -> int:
    """Monitors of a checkpointed state, as one JSON object on stdout."""
    checkpoint = read_checkpoint(args.checkpoint)
    solver = solver_from_checkpoint(checkpoint)
    state = solver.restore(checkpoint.fields, checkpoint.t, checkpoint.step)
    diagnostics = solver.diagnose(state)
    record = {
        "system": checkpoint.system.value,
        "grid": list(checkpoint.grid.sizes),
        **diagnostics.model_dump(),
        "stored_symmetry_residual": max(
            (symmetry_residual(f) for f in checkpoint.fields.values()), default=0.0
        ),
    }
    if "qe" in checkpoint.fields:
        record["stored_qe_max"] = float(checkpoint.fields["qe"].physical().max())
    text = json.dumps(record, sort_keys=True)
    if args.out is not None:
        try:
            args.out.parent.mkdir(parents=True, exist_ok=True)
            args.out.write_text(text + "\n", encoding="utf-8")
        except OSError as e:
            msg = f"cannot write {args.out}: {e}"
            raise StorageError(msg) from e
    print(text)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        set_log_level(args.log_level or get_config().settings.log_level)
        if args.command in _RUN_COMMANDS:
            return run_command(_RUN_COMMANDS[args.command], args)
        if args.command in _LIMIT_COMMANDS:
            return limit_command(args.command, args)
        return diagnose_command(args)
    except GeolabError as e:
        logger.error("command=<%s>, exit_code=<%d>, error=<%s> | command failed", args.command, e.exit_code, e)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
