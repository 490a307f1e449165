"""Exception hierarchy shared by every layer.

Each top-level family carries the process exit code the CLI reports for it.
"""


class GeolabError(Exception):
    """Base exception for all geolab errors."""

    exit_code: int = 1


class ConfigError(GeolabError, ValueError):
    """Invalid run configuration (unknown key, bad type, violated constraint)."""

    exit_code = 2

    def __init__(
        self,
        message: str,
        key: str | None = None,
        line: int | None = None,
        constraint: str | None = None,
    ) -> None:
        """Initialize config error.

        Args:
            message: Human-readable description
            key: Dotted config key (e.g. "physics.Qbar")
            line: 1-based line number in the config text, when known
            constraint: Mathematical condition that failed (e.g. "0 < Qbar < 1")
        """
        self.key = key
        self.line = line
        self.constraint = constraint
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if key is not None:
            parts.append(f"key '{key}'")
        prefix = ", ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class NumericalError(GeolabError):
    """Numerical failure during a run (CFL violation, blow-up, broken constraint)."""

    exit_code = 3


class StorageError(GeolabError):
    """Checkpoint or report I/O failure."""

    exit_code = 4
