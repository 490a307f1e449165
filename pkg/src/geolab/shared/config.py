"""Configuration management for geolab.

Loads configuration from:
1. Environment variables (GEOLAB_* or a .env file)
2. YAML configuration files (defaults.yaml, scenarios.yaml)
3. Default values

Usage:
    from geolab.shared.config import get_config

    config = get_config()
    preset = config.get_sweep_preset("hydrostatic_default")
"""

from pathlib import Path
from typing import Any

import yaml
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from geolab.shared.errors import ConfigError
from geolab.shared.logging import get_logger

logger = get_logger(__name__)

_PROJECT_ROOT = Path(__file__).resolve().parents[3]


class Settings(BaseSettings):
    """Application settings from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="GEOLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    log_level: str = Field(default="INFO", description="Level applied by the CLI at startup")

    # Parallelism
    fft_workers: int = Field(default=1, ge=1, description="Threads per FFT (scipy.fft workers)")
    sweep_workers: int = Field(default=1, ge=1, description="Parallel workers for per-epsilon runs")

    # Output
    output_dir: str = Field(default="runs")


# Used when the YAML files are not shipped next to the package
_BUILTIN_SYSTEM_DEFAULTS: dict[str, dict[str, Any]] = {
    "sns": {"L1": 1.0, "L2": 1.0, "epsilon": 0.1, "cfl": 0.5},
    "pe": {"L1": 1.0, "L2": 1.0, "h": 1.0, "f0": 1.0, "cfl": 0.5},
    "tam": {
        "L1": 6.283185307179586,
        "L2": 6.283185307179586,
        "mu": 1.0,
        "H": 1.0,
        "cfl": 0.5,
    },
}


class Config:
    """Configuration manager for geolab."""

    def __init__(self, config_dir: Path | None = None) -> None:
        """Initialize configuration.

        Args:
            config_dir: Path to config directory (defaults to project root/config)
        """
        self.settings = Settings()

        self.config_dir = Path(config_dir) if config_dir is not None else _PROJECT_ROOT / "config"
        self.defaults_config: dict[str, Any] = {}
        self.scenarios_config: dict[str, Any] = {}
        self._load_yaml_configs()

    def _load_yaml_configs(self) -> None:
        self.defaults_config = self._read_yaml("defaults.yaml", "system defaults")
        self.scenarios_config = self._read_yaml("scenarios.yaml", "scenario presets")

    def _read_yaml(self, filename: str, what: str) -> dict[str, Any]:
        path = self.config_dir / filename
        if not path.exists():
            logger.warning("config_file=<%s> | %s file not found, using built-ins", path, what)
            return {}
        logger.debug("config_file=<%s> | loading %s", path, what)
        with path.open() as f:
            loaded = yaml.safe_load(f) or {}
        if not isinstance(loaded, dict):
            msg = f"{path} must hold a mapping, got {type(loaded).__name__}"
            raise ConfigError(msg)
        return loaded

    def get_system_defaults(self, system: str) -> dict[str, Any]:
        """Get default physical/integrator constants for a system.

        Args:
            system: System tag ("sns", "pe" or "tam")

        Returns:
            Flat mapping of key to default value
        """
        systems = self.defaults_config.get("systems", {})
        merged = dict(_BUILTIN_SYSTEM_DEFAULTS.get(system, {}))
        merged.update(systems.get(system, {}) or {})
        return merged

    def get_ic_preset(self, name: str) -> dict[str, Any]:
        """Get parameters of a named initial-condition preset.

        Args:
            name: Preset name (e.g. "hydrostatic_taylor_green")

        Returns:
            Preset dict with "name" and "params" keys (empty if unknown)
        """
        return dict(self.scenarios_config.get("initial_conditions", {}).get(name, {}))

    def get_sweep_preset(self, name: str) -> dict[str, Any]:
        """Get a named epsilon-sweep preset.

        Args:
            name: Preset name (e.g. "hydrostatic_default")

        Returns:
            Sweep preset dict (empty if unknown)
        """
        return dict(self.scenarios_config.get("sweeps", {}).get(name, {}))


# Global config instance
_config: Config | None = None


def get_config(config_dir: Path | None = None) -> Config:
    """Get global configuration instance.

    Args:
        config_dir: Optional config directory path (only used on first call)

    Returns:
        Config instance
    """
    global _config
    if _config is None:
        _config = Config(config_dir=config_dir)
    return _config


def reload_config(config_dir: Path | None = None) -> Config:
    """Reload configuration (useful for testing).

    Args:
        config_dir: Optional config directory path

    Returns:
        New Config instance
    """
    global _config
    _config = Config(config_dir=config_dir)
    return _config
