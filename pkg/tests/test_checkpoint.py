"""Tests for binary checkpoints."""

from pathlib import Path

import numpy as np
import pytest

from geolab.experiments.initial_conditions import build_initial_state
from geolab.interfaces.checkpoint import (
    MAGIC,
    CheckpointError,
    CheckpointFormatError,
    CheckpointTagError,
    Direction,
    checkpoint_io,
    decode,
    encode,
    read_checkpoint,
    solver_from_checkpoint,
    write_checkpoint,
)
from geolab.shared.models import PEVariant, SystemTag
from geolab.spectral.grid import Grid2, Grid3
from tests.test_utils import make_grid3, pe_solver, sns_solver, tam_solver


@pytest.mark.unit
class TestRoundTrip:
    """Tests that written states read back unchanged."""

    def test_pe_state(self, grid3: Grid3, tmp_path: Path) -> None:
        """Test that every stored field holds exactly the values written."""
        solver = pe_solver(grid3, variant=PEVariant.HV)
        state = solver.step(build_initial_state(solver, "random_smooth", {"seed": 1}))
        path = write_checkpoint(tmp_path / "pe.geol", solver, state)
        checkpoint = read_checkpoint(path)
        assert checkpoint.system is SystemTag.PE
        assert checkpoint.step == 1
        assert checkpoint.t == state.t
        assert list(checkpoint.fields) == ["v1", "v2", "T", "w", "p"]
        for name, f in solver.fields(state).items():
            assert np.array_equal(checkpoint.fields[name].physical(), f.physical())
            assert checkpoint.fields[name].sym is f.sym

    def test_tam_restore(self, grid2: Grid2, tmp_path: Path) -> None:
        """Test checkpoint_io write then read for the tropical model."""
        solver = tam_solver(grid2)
        state = build_initial_state(solver, "vortical")
        path = tmp_path / "tam.geol"
        assert checkpoint_io(path, Direction.WRITE, solver, state) is None
        restored = checkpoint_io(path, "read", solver)
        assert np.array_equal(restored.qe.physical(), state.qe.physical())
        assert np.array_equal(restored.Te.physical(), state.Te.physical())
        assert restored.t == state.t

    def test_solver_rebuilt_from_metadata(self, grid3: Grid3) -> None:
        """Test that the header and metadata describe the run."""
        solver = sns_solver(grid3, epsilon=0.25)
        state = build_initial_state(solver, "taylor_green")
        rebuilt = solver_from_checkpoint(decode(encode(solver, state)))
        assert rebuilt.system == SystemTag.SNS.value
        assert rebuilt.cfg == solver.cfg

    def test_deterministic_bytes(self, grid3: Grid3) -> None:
        """Test that encoding the same state twice gives identical bytes."""
        solver = pe_solver(grid3)
        state = build_initial_state(solver, "taylor_green")
        assert encode(solver, state) == encode(solver, state)
        assert encode(solver, state)[:4] == MAGIC


@pytest.mark.unit
class TestMalformed:
    """Tests for rejected checkpoint files."""

    @pytest.fixture
    def data(self, grid3: Grid3) -> bytes:
        solver = pe_solver(grid3, variant=PEVariant.NOTEMP)
        return encode(solver, build_initial_state(solver, "zero"))

    def test_truncated(self, data: bytes) -> None:
        """Test that a cut-off file raises CheckpointFormatError."""
        with pytest.raises(CheckpointFormatError, match="truncated"):
            decode(data[:-8])
        with pytest.raises(CheckpointFormatError, match="truncated"):
            decode(data[:10])

    def test_bad_magic(self, data: bytes) -> None:
        """Test that foreign files are refused."""
        with pytest.raises(CheckpointFormatError, match="magic"):
            decode(b"NOPE" + data[4:])

    def test_wrong_version(self, data: bytes) -> None:
        """Test that another format version is refused."""
        with pytest.raises(CheckpointFormatError, match="version 9"):
            decode(data[:4] + (9).to_bytes(2, "little") + data[6:])

    def test_trailing_bytes(self, data: bytes) -> None:
        """Test that extra bytes after the last field are refused."""
        with pytest.raises(CheckpointFormatError, match="trailing"):
            decode(data + b"\0")

    def test_format_error_exit_code(self) -> None:
        """Test that checkpoint errors map to exit code 4."""
        assert CheckpointFormatError("x").exit_code == 4


@pytest.mark.unit
class TestMismatch:
    """Tests for system and grid checks on read."""

    def test_wrong_system(self, grid3: Grid3, tmp_path: Path) -> None:
        """Test that a PE checkpoint cannot resume an SNS run."""
        pe = pe_solver(grid3)
        path = write_checkpoint(tmp_path / "pe.geol", pe, build_initial_state(pe, "zero"))
        with pytest.raises(CheckpointTagError, match="pe state"):
            checkpoint_io(path, Direction.READ, sns_solver(grid3))

    def test_wrong_grid(self, grid3: Grid3, tmp_path: Path) -> None:
        """Test that a checkpoint from another resolution is refused."""
        pe = pe_solver(grid3)
        path = write_checkpoint(tmp_path / "pe.geol", pe, build_initial_state(pe, "zero"))
        with pytest.raises(CheckpointTagError, match="does not match"):
            checkpoint_io(path, Direction.READ, pe_solver(make_grid3(8)))

    def test_write_without_state(self, grid3: Grid3, tmp_path: Path) -> None:
        """Test that a write needs a state."""
        with pytest.raises(CheckpointError):
            checkpoint_io(tmp_path / "x.geol", Direction.WRITE, pe_solver(grid3))

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test that an unreadable path raises CheckpointError."""
        with pytest.raises(CheckpointError, match="cannot read"):
            read_checkpoint(tmp_path / "absent.geol")
