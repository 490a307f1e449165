"""Run and sweep configuration parsing.

Run configs are plain key=value text with section headers:

    [system]
    system = tam
    [physics]
    Qbar = 0.5
    epsilon = 0.05
    [ic]
    name = vortical
    jet = 0.5

A YAML document with the same sections is accepted too. Missing constants
come from the per-system defaults in config/defaults.yaml. Every error is a
ConfigError naming the key, the line and, for mathematical conditions, the
condition itself.
"""

import re
from typing import Any

import yaml
from pydantic import ValidationError

from geolab.shared.config import get_config
from geolab.shared.errors import ConfigError
from geolab.shared.logging import get_logger
from geolab.shared.models import CONSTRAINT_ERROR, RunConfig, SweepKind, SweepSpec

logger = get_logger(__name__)

RUN_SECTIONS = ("system", "grid", "physics", "integrator", "ic", "output")
SWEEP_SECTIONS = ("sweep", "ic", "physics")

# where each per-system default lands in a run config
_DEFAULT_SECTIONS = {"L1": "grid", "L2": "grid", "cfl": "integrator"}

_SECTION_HEADER = re.compile(r"^\[\s*([A-Za-z_]+)\s*\]$")

Sections = dict[str, dict[str, Any]]


def _value(raw: str) -> Any:
    """Comma-separated or bracketed values become lists; everything else stays a string."""
    bracketed = raw.startswith("[") and raw.endswith("]")
    if bracketed:
        raw = raw[1:-1]
    if bracketed or "," in raw:
        return [part.strip() for part in raw.split(",") if part.strip()]
    return raw


def _parse_key_value(text: str, allowed: tuple[str, ...]) -> tuple[Sections, dict[str, int]]:
    """Sections of key=value text and the line of every dotted key."""
    sections: Sections = {}
    lines: dict[str, int] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = re.split(r"\s[#;]|^[#;]", raw, maxsplit=1)[0].strip()
        if not line:
            continue
        header = _SECTION_HEADER.match(line)
        if header:
            current = header.group(1).lower()
            if current not in allowed:
                msg = f"unknown section [{current}] (known: {', '.join(allowed)})"
                raise ConfigError(msg, line=lineno)
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            msg = f"expected 'key = value', got {line!r}"
            raise ConfigError(msg, line=lineno)
        if current is None:
            msg = "key outside of any section"
            raise ConfigError(msg, line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        dotted = f"{current}.{key}"
        if not key:
            msg = "empty key"
            raise ConfigError(msg, line=lineno)
        if dotted in lines:
            msg = f"duplicate key (first set on line {lines[dotted]})"
            raise ConfigError(msg, key=dotted, line=lineno)
        sections[current][key] = _value(value)
        lines[dotted] = lineno
    return sections, lines


def _parse_yaml(text: str, allowed: tuple[str, ...]) -> tuple[Sections, dict[str, int]]:
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        msg = f"invalid YAML: {e}"
        raise ConfigError(msg, line=line) from e
    if not isinstance(data, dict):
        msg = "config must be a mapping of sections"
        raise ConfigError(msg)
    sections: Sections = {}
    lines: dict[str, int] = {}
    text_lines = text.splitlines()
    for name, body in data.items():
        if name not in allowed:
            msg = f"unknown section [{name}] (known: {', '.join(allowed)})"
            raise ConfigError(msg, line=_yaml_line(text_lines, str(name)))
        if not isinstance(body, dict):
            msg = "section must be a mapping"
            raise ConfigError(msg, key=str(name), line=_yaml_line(text_lines, str(name)))
        sections[name] = dict(body)
        for key in body:
            line = _yaml_line(text_lines, str(key))
            if line is not None:
                lines[f"{name}.{key}"] = line
    return sections, lines


def _yaml_line(text_lines: list[str], key: str) -> int | None:
    pattern = re.compile(rf"^\s*{re.escape(key)}\s*:")
    for lineno, line in enumerate(text_lines, start=1):
        if pattern.match(line):
            return lineno
    return None


def _is_key_value(text: str) -> bool:
    return any(_SECTION_HEADER.match(line.strip()) for line in text.splitlines())


def _read_sections(text: str, allowed: tuple[str, ...]) -> tuple[Sections, dict[str, int]]:
    if _is_key_value(text):
        return _parse_key_value(text, allowed)
    return _parse_yaml(text, allowed)


def _resolve_ic(ic: dict[str, Any]) -> dict[str, Any]:
    """Turn an [ic] section into {name, params}; 'preset' pulls a named scenario."""
    ic = dict(ic)
    params: dict[str, Any] = {}
    name = None
    preset_name = ic.pop("preset", None)
    if preset_name is not None:
        preset = get_config().get_ic_preset(str(preset_name))
        if not preset:
            msg = f"unknown initial-condition preset '{preset_name}'"
            raise ConfigError(msg, key="ic.preset")
        name = preset.get("name")
        params.update(preset.get("params") or {})
    name = ic.pop("name", name)
    nested = ic.pop("params", None)
    if isinstance(nested, dict):
        params.update(nested)
    params.update(ic)
    return {"name": name or "zero", "params": params}


def _fill_defaults(sections: Sections) -> Sections:
    """Per-system constants for keys the config leaves out."""
    system = sections.get("system", {}).get("system")
    if system is None:
        return sections
    filled = {name: dict(body) for name, body in sections.items()}
    for key, value in get_config().get_system_defaults(str(system).lower()).items():
        section = _DEFAULT_SECTIONS.get(key, "physics")
        filled.setdefault(section, {}).setdefault(key, value)
    return filled


def _error_from_validation(e: ValidationError, lines: dict[str, int], prefix: str = "") -> ConfigError:
    """ConfigError for the first pydantic error, quoting key, line and constraint."""
    first = e.errors()[0]
    key = ".".join(str(part) for part in first["loc"])
    constraint = None
    if first["type"] == CONSTRAINT_ERROR:
        ctx = first.get("ctx") or {}
        key = str(ctx.get("key", key))
        constraint = ctx.get("constraint")
    elif first["type"] == "extra_forbidden":
        msg = "unknown key"
        dotted = f"{prefix}{key}"
        return ConfigError(msg, key=dotted, line=lines.get(dotted))
    elif first["type"] == "missing":
        msg = "required key missing"
        dotted = f"{prefix}{key}"
        return ConfigError(msg, key=dotted)
    dotted = f"{prefix}{key}" if key else None
    line = lines.get(dotted) if dotted else None
    if line is None and dotted is not None:
        # errors raised on a whole section point at its first key
        line = min((n for k, n in lines.items() if k.startswith(f"{dotted}.")), default=None)
    return ConfigError(first["msg"], key=dotted, line=line, constraint=constraint)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a run configuration.

    Args:
        text: key=value text with [section] headers, or YAML with the same sections

    Returns:
        Fully validated RunConfig with system defaults filled in

    Raises:
        ConfigError: Unknown section or key, bad value, or violated constraint
    """
    sections, lines = _read_sections(text, RUN_SECTIONS)
    if "system" not in sections or "system" not in sections["system"]:
        msg = "required key missing"
        raise ConfigError(msg, key="system.system")
    sections = _fill_defaults(sections)
    if "ic" in sections:
        sections["ic"] = _resolve_ic(sections["ic"])
    try:
        run = RunConfig.model_validate(sections)
    except ValidationError as e:
        raise _error_from_validation(e, lines) from e
    logger.debug(
        "system=<%s>, ic=<%s> | run config parsed", run.system.system.value, run.ic.name
    )
    return run


def parse_sweep_config(text: str, kind: SweepKind) -> SweepSpec:
    """Parse an epsilon-sweep configuration.

    The [sweep] section holds kind-independent keys (epsilons, resolution, dt,
    t_end, sample_interval, lengths, workers) and may name a preset from
    scenarios.yaml whose values it overrides. [ic] and [physics] are as in run
    configs.

    Raises:
        ConfigError: Unknown key, bad value, kind mismatch or invalid sweep
    """
    sections, lines = _read_sections(text, SWEEP_SECTIONS)
    sweep = dict(sections.get("sweep", {}))
    preset_name = sweep.pop("preset", None)
    data: dict[str, Any] = {}
    if preset_name is not None:
        data = get_config().get_sweep_preset(str(preset_name))
        if not data:
            msg = f"unknown sweep preset '{preset_name}'"
            raise ConfigError(msg, key="sweep.preset", line=lines.get("sweep.preset"))
        if isinstance(data.get("ic"), str):
            data["ic"] = get_config().get_ic_preset(data["ic"])
    data.update(sweep)
    data.setdefault("kind", kind.value)
    if str(data["kind"]) != kind.value:
        msg = f"expected a {kind.value} sweep, got {data['kind']}"
        raise ConfigError(msg, key="sweep.kind", line=lines.get("sweep.kind"))
    if "ic" in sections:
        data["ic"] = _resolve_ic(sections["ic"])
    if "physics" in sections:
        data["physics"] = sections["physics"]
    try:
        spec = SweepSpec.model_validate(data)
    except ValidationError as e:
        first_loc = e.errors()[0]["loc"]
        prefix = "" if first_loc and first_loc[0] in ("ic", "physics") else "sweep."
        raise _error_from_validation(e, lines, prefix) from e
    logger.debug("kind=<%s>, epsilons=<%s> | sweep config parsed", spec.kind.value, spec.epsilons)
    return spec
