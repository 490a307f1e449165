"""Pytest configuration and fixtures for geolab tests."""

from pathlib import Path

import pytest

from geolab.shared.config import Config, reload_config
from geolab.spectral.grid import Grid2, Grid3
from tests.test_utils import make_grid2, make_grid3, set_local_test_env

CONFIG_DIR = Path(__file__).parent.parent / "config"


@pytest.fixture(scope="session", autouse=True)
def setup_test_environment() -> None:
    """Set up test environment variables for all tests."""
    set_local_test_env()


@pytest.fixture
def config_dir() -> Path:
    """Project config directory (defaults.yaml, scenarios.yaml)."""
    return CONFIG_DIR


@pytest.fixture
def project_config(config_dir: Path) -> Config:
    """Fresh global configuration loaded from the project config directory."""
    return reload_config(config_dir)


@pytest.fixture
def grid3() -> Grid3:
    """16^3 grid on the unit box with Lz = 2."""
    return make_grid3(16)


@pytest.fixture
def grid2() -> Grid2:
    """16^2 grid on the 2*pi box."""
    return make_grid2(16)


@pytest.fixture
def out_dir(tmp_path: Path) -> Path:
    """Scratch output directory."""
    path = tmp_path / "out"
    path.mkdir()
    return path
