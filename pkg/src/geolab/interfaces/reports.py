"""Report emission: CSV tables, JSON lines and human-readable tables.

CSV prints floats with 17 significant digits and JSON lines with the shortest
repr that round-trips, so both reproduce every double exactly. Machine formats
leave out wall-clock times, so identical runs give byte-identical files.
"""

import csv
import io
import json
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any, Literal

from geolab.experiments.simulation import Trajectory
from geolab.shared.errors import StorageError
from geolab.shared.logging import get_logger
from geolab.shared.models import RunStatus, StepDiagnostics, StudyReport, StudyRow

logger = get_logger(__name__)

ReportFormat = Literal["csv", "jsonl", "human"]
ALL_FORMATS: tuple[ReportFormat, ...] = ("csv", "jsonl", "human")

EXCLUDED_MARKER = "excluded-from-fit"

ROW_COLUMNS = (
    "epsilon",
    "status",
    "fit",
    "error",
    "error_h1",
    "dissipation_integral",
    "hydrostatic_residual",
    "q_plus_integral",
    "budget_residual",
    "message",
)


class ReportError(StorageError):
    """Report cannot be emitted."""


def fmt(value: Any) -> Any:
    """17 significant digits for floats, empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.17g}"
    return value


def _row_record(row: StudyRow) -> dict[str, Any]:
    return {
        "epsilon": row.epsilon,
        "status": row.status.value,
        "fit": "included" if row.included_in_fit else EXCLUDED_MARKER,
        "error": row.error,
        "error_h1": row.error_h1,
        "dissipation_integral": row.dissipation_integral,
        "hydrostatic_residual": row.hydrostatic_residual,
        "q_plus_integral": row.q_plus_integral,
        "budget_residual": row.budget_residual,
        "message": row.message,
    }


def _summary_record(report: StudyReport) -> dict[str, Any]:
    return {
        "kind": report.kind.value,
        "status": report.status.value,
        "slope": report.slope,
        "residual": report.residual,
        "expected_slope": report.expected_slope,
        "reference": report.reference,
        "cross_check": dict(sorted(report.cross_check.items())),
    }


def study_csv(report: StudyReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(ROW_COLUMNS)
    for row in report.rows:
        record = _row_record(row)
        writer.writerow([fmt(record[c]) for c in ROW_COLUMNS])
    return buffer.getvalue()


def study_jsonl(report: StudyReport) -> str:
    """One JSON object per row, then one summary object."""
    lines = [json.dumps({"type": "row", **_row_record(row)}) for row in report.rows]
    lines.append(json.dumps({"type": "summary", **_summary_record(report)}))
    return "\n".join(lines) + "\n"


def _table(headers: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    rows = [list(r) for r in rows]
    widths = [len(h) for h in headers]
    for r in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, r, strict=True)]
    line = "  ".join(h.ljust(w) for h, w in zip(headers, widths, strict=True))
    out = [line, "-" * len(line)]
    out.extend("  ".join(cell.ljust(w) for cell, w in zip(r, widths, strict=True)) for r in rows)
    return "\n".join(out)


def _short(value: float | None) -> str:
    return "-" if value is None else f"{value:.4e}"


def study_human(report: StudyReport) -> str:
    headers = ("epsilon", "status", "error", "H1 error", "d_z p", "q+ integral", "runtime [s]", "")
    rows = [
        (
            f"{row.epsilon:g}",
            row.status.value,
            _short(row.error),
            _short(row.error_h1),
            _short(row.hydrostatic_residual),
            _short(row.q_plus_integral),
            "-" if row.runtime_s is None else f"{row.runtime_s:.1f}",
            "" if row.included_in_fit else EXCLUDED_MARKER,
        )
        for row in report.rows
    ]
    slope = "undefined" if report.slope is None else f"{report.slope:.4f}"
    lines = [
        f"{report.kind.value} limit study against {report.reference}",
        _table(headers, rows),
        "",
        f"status: {report.status.value}",
        f"fitted slope: {slope} (expected {report.expected_slope:g})",
    ]
    if report.residual is not None:
        lines.append(f"fit residual: {report.residual:.3e}")
    for key, value in sorted(report.cross_check.items()):
        lines.append(f"{key}: {value:.6g}")
    if report.runtime_s is not None:
        lines.append(f"runtime: {report.runtime_s:.1f} s")
    return "\n".join(lines) + "\n"


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        msg = f"cannot write {path}: {e}"
        raise ReportError(msg) from e
    logger.debug("path=<%s> | report written", path)
    return path


def emit_report(
    report: StudyReport,
    formats: Sequence[ReportFormat] = ALL_FORMATS,
    out_dir: Path | str = ".",
    stem: str | None = None,
) -> list[Path]:
    """Write a study report in each requested format.

    Args:
        report: Completed study report
        formats: Any of "csv", "jsonl", "human"
        out_dir: Target directory (created if missing)
        stem: File name stem, default "<kind>_study"

    Returns:
        Written paths, in format order

    Raises:
        ReportError: No successful runs, unknown format, or I/O failure
    """
    if not any(row.status is RunStatus.OK for row in report.rows):
        msg = "no successful runs"
        raise ReportError(msg)
    out = Path(out_dir)
    stem = stem or f"{report.kind.value}_study"
    renderers = {"csv": (study_csv, "csv"), "jsonl": (study_jsonl, "jsonl"), "human": (study_human, "txt")}
    written = []
    for name in formats:
        if name not in renderers:
            msg = f"unknown report format {name!r}"
            raise ReportError(msg)
        render, suffix = renderers[name]
        written.append(_write(out / f"{stem}.{suffix}", render(report)))
    logger.info("out_dir=<%s>, files=<%d> | study report emitted", out, len(written))
    return written


# -- single-run diagnostics ----------------------------------------------------

DIAGNOSTIC_COLUMNS = (
    "step",
    "t",
    "energy",
    "dissipation",
    "exchange",
    "divergence_residual",
    "symmetry_residual",
    "max_speed",
)


def _extra_keys(diagnostics: Sequence[StepDiagnostics]) -> list[str]:
    keys: set[str] = set()
    for d in diagnostics:
        keys.update(d.extras)
    return sorted(keys)


def diagnostics_csv(diagnostics: Sequence[StepDiagnostics]) -> str:
    extras = _extra_keys(diagnostics)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([*DIAGNOSTIC_COLUMNS, *extras])
    for d in diagnostics:
        base = [fmt(getattr(d, c)) for c in DIAGNOSTIC_COLUMNS]
        writer.writerow([*base, *(fmt(d.extras.get(k)) for k in extras)])
    return buffer.getvalue()


def diagnostics_jsonl(diagnostics: Sequence[StepDiagnostics]) -> str:
    lines = [json.dumps(d.model_dump(), sort_keys=True) for d in diagnostics]
    return "\n".join(lines) + ("\n" if lines else "")


def diagnostics_human(trajectory: Trajectory) -> str:
    headers = ("step", "t", "energy", "dissipation", "div residual", "sym residual", "max speed")
    rows = [
        (
            str(d.step),
            f"{d.t:.4f}",
            f"{d.energy:.6e}",
            f"{d.dissipation:.4e}",
            f"{d.divergence_residual:.2e}",
            f"{d.symmetry_residual:.2e}",
            f"{d.max_speed:.4f}",
        )
        for d in trajectory.diagnostics
    ]
    return "\n".join(
        [
            f"{trajectory.system} run, dt={trajectory.dt:g}, {trajectory.steps} steps",
            _table(headers, rows),
            f"runtime: {trajectory.runtime_s:.1f} s",
        ]
    ) + "\n"


def emit_diagnostics(
    trajectory: Trajectory,
    formats: Sequence[ReportFormat] = ALL_FORMATS,
    out_dir: Path | str = ".",
) -> list[Path]:
    """Write the sampled diagnostics of a run.

    Raises:
        ReportError: Unknown format or I/O failure
    """
    out = Path(out_dir)
    written = []
    for name in formats:
        if name == "csv":
            written.append(_write(out / "diagnostics.csv", diagnostics_csv(trajectory.diagnostics)))
        elif name == "jsonl":
            written.append(_write(out / "diagnostics.jsonl", diagnostics_jsonl(trajectory.diagnostics)))
        elif name == "human":
            written.append(_write(out / "diagnostics.txt", diagnostics_human(trajectory)))
        else:
            msg = f"unknown report format {name!r}"
            raise ReportError(msg)
    return written
