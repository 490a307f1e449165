"""Binary checkpoints of solver states.

Layout (all little-endian):

    magic        4 bytes   b"GEOL"
    version      u16
    system       8 bytes   ascii tag, NUL padded
    ndim         u8
    dims         3 x u32   (N1, N2, N3), N3 = 0 for 2-D
    lengths      3 x f64   (L1, L2, Lz), Lz = 0 for 2-D
    time         f64
    step         u64
    n_fields     u16
    meta_len     u32, then meta_len bytes of UTF-8 JSON (solver constants)
    per field:   u8 name length, name, u8 symmetry, then N1*N2[*N3] f64
                 physical values with x varying fastest

Payloads are physical-space values, so a field read back holds exactly the
values that were written.
"""

import json
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from geolab.experiments.initial_conditions import AnySolver, AnyState
from geolab.shared.errors import StorageError
from geolab.shared.logging import get_logger
from geolab.shared.models import PEVariant, SystemTag
from geolab.solvers.pe import PEConfig, PESolver
from geolab.solvers.sns import SNSConfig, SNSSolver
from geolab.solvers.tam import TAMConfig, TAMSolver
from geolab.spectral.field import SpectralField
from geolab.spectral.grid import Grid, Grid2, Grid3, SymmetryClass

logger = get_logger(__name__)

MAGIC = b"GEOL"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sH8sB3I3ddQH")
_META_LEN = struct.Struct("<I")
_BYTE = struct.Struct("<B")
_SYMMETRY_CODES = {SymmetryClass.NONE: 0, SymmetryClass.EVEN: 1, SymmetryClass.ODD: 2}
_SYMMETRY_FROM_CODE = {code: cls for cls, code in _SYMMETRY_CODES.items()}


class CheckpointError(StorageError):
    """Checkpoint cannot be written or read."""


class CheckpointFormatError(CheckpointError):
    """Bad magic, unsupported version, truncated or malformed file."""


class CheckpointTagError(CheckpointError):
    """Checkpoint belongs to another system or grid than the run."""


class Direction(str, Enum):
    """checkpoint_io direction."""

    READ = "read"
    WRITE = "write"


@dataclass(frozen=True)
class Checkpoint:
    """Decoded checkpoint contents."""

    system: SystemTag
    grid: Grid
    t: float
    step: int
    fields: dict[str, SpectralField]
    metadata: dict[str, Any]


def _solver_metadata(solver: AnySolver) -> dict[str, Any]:
    return solver.cfg.model_dump(mode="json", exclude={"grid"})


def encode(solver: AnySolver, state: AnyState) -> bytes:
    """Serialize a state of the given solver."""
    grid = solver.cfg.grid
    fields = solver.fields(state)
    dims = (*grid.sizes, 0) if isinstance(grid, Grid2) else grid.sizes
    lengths = (*grid.lengths, 0.0) if isinstance(grid, Grid2) else grid.lengths
    meta = json.dumps(_solver_metadata(solver), sort_keys=True).encode("utf-8")
    parts = [
        _HEADER.pack(
            MAGIC,
            FORMAT_VERSION,
            solver.system.encode("ascii"),
            grid.ndim,
            *dims,
            *lengths,
            float(state.t),
            int(state.step),
            len(fields),
        ),
        _META_LEN.pack(len(meta)),
        meta,
    ]
    for name, f in fields.items():
        encoded = name.encode("utf-8")
        parts.append(_BYTE.pack(len(encoded)) + encoded + _BYTE.pack(_SYMMETRY_CODES[f.sym]))
        parts.append(np.asarray(f.physical(), dtype="<f8").ravel(order="F").tobytes())
    return b"".join(parts)


class _Cursor:
    """Sequential reader that fails cleanly on short input."""

    def __init__(self, data: bytes) -> None:
        self.data = data
        self.offset = 0

    def take(self, n: int, what: str) -> bytes:
        end = self.offset + n
        if end > len(self.data):
            msg = f"truncated checkpoint: {what} needs {n} bytes at offset {self.offset}, file has {len(self.data)}"
            raise CheckpointFormatError(msg)
        chunk = self.data[self.offset : end]
        self.offset = end
        return chunk


def decode(data: bytes) -> Checkpoint:
    """Parse checkpoint bytes.

    Raises:
        CheckpointFormatError: Bad magic, unsupported version, truncated or malformed data
    """
    cursor = _Cursor(data)
    magic, version, tag, ndim, n1, n2, n3, l1, l2, lz, t, step, n_fields = _HEADER.unpack(
        cursor.take(_HEADER.size, "header")
    )
    if magic != MAGIC:
        msg = f"not a geolab checkpoint (magic {magic!r})"
        raise CheckpointFormatError(msg)
    if version != FORMAT_VERSION:
        msg = f"unsupported checkpoint version {version} (expected {FORMAT_VERSION})"
        raise CheckpointFormatError(msg)
    try:
        system = SystemTag(tag.rstrip(b"\0").decode("ascii"))
    except (UnicodeDecodeError, ValueError) as e:
        msg = f"unknown system tag {tag!r}"
        raise CheckpointFormatError(msg) from e
    try:
        grid: Grid = (
            Grid3(L1=l1, L2=l2, Lz=lz, N1=n1, N2=n2, N3=n3)
            if ndim == 3
            else Grid2(L1=l1, L2=l2, N1=n1, N2=n2)
        )
    except ValueError as e:
        msg = f"invalid grid in header: {e}"
        raise CheckpointFormatError(msg) from e
    (meta_len,) = _META_LEN.unpack(cursor.take(_META_LEN.size, "metadata length"))
    try:
        metadata = json.loads(cursor.take(meta_len, "metadata").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        msg = f"malformed metadata block: {e}"
        raise CheckpointFormatError(msg) from e

    fields: dict[str, SpectralField] = {}
    for _ in range(n_fields):
        (name_len,) = _BYTE.unpack(cursor.take(1, "field name length"))
        name = cursor.take(name_len, "field name").decode("utf-8")
        (code,) = _BYTE.unpack(cursor.take(1, "field symmetry"))
        if code not in _SYMMETRY_FROM_CODE:
            msg = f"field {name!r}: unknown symmetry code {code}"
            raise CheckpointFormatError(msg)
        payload = cursor.take(8 * grid.npoints, f"field {name!r}")
        values = np.frombuffer(payload, dtype="<f8").reshape(grid.shape, order="F")
        fields[name] = SpectralField.from_physical(grid, values, _SYMMETRY_FROM_CODE[code])
    if cursor.offset != len(data):
        msg = f"{len(data) - cursor.offset} trailing bytes after the last field"
        raise CheckpointFormatError(msg)
    return Checkpoint(system, grid, float(t), int(step), fields, metadata)


def solver_from_checkpoint(checkpoint: Checkpoint) -> AnySolver:
    """Rebuild the solver a checkpoint was written with."""
    meta = dict(checkpoint.metadata)
    grid = checkpoint.grid
    try:
        if checkpoint.system is SystemTag.SNS:
            return SNSSolver(SNSConfig(grid=grid, **meta))
        if checkpoint.system is SystemTag.PE:
            meta["variant"] = PEVariant(meta.get("variant", PEVariant.FV))
            return PESolver(PEConfig(grid=grid, **meta))
        return TAMSolver(TAMConfig(grid=grid, **meta))
    except ValueError as e:
        msg = f"checkpoint metadata does not describe a valid {checkpoint.system.value} run: {e}"
        raise CheckpointFormatError(msg) from e


def _check_matches(checkpoint: Checkpoint, solver: AnySolver) -> None:
    if checkpoint.system.value != solver.system:
        msg = f"checkpoint holds a {checkpoint.system.value} state, run is {solver.system}"
        raise CheckpointTagError(msg)
    expected = solver.cfg.grid
    if checkpoint.grid.sizes != expected.sizes or not np.allclose(
        checkpoint.grid.lengths, expected.lengths
    ):
        msg = (
            f"checkpoint grid {checkpoint.grid.sizes} x {checkpoint.grid.lengths} "
            f"does not match run grid {expected.sizes} x {expected.lengths}"
        )
        raise CheckpointTagError(msg)


def write_checkpoint(path: Path | str, solver: AnySolver, state: AnyState) -> Path:
    """Write a checkpoint atomically (temporary file, then rename)."""
    path = Path(path)
    data = encode(solver, state)
    tmp = path.with_name(path.name + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp.write_bytes(data)
        tmp.replace(path)
    except OSError as e:
        msg = f"cannot write checkpoint {path}: {e}"
        raise CheckpointError(msg) from e
    logger.debug("path=<%s>, step=<%d>, bytes=<%d> | checkpoint written", path, state.step, len(data))
    return path


def read_checkpoint(path: Path | str) -> Checkpoint:
    """Read and decode a checkpoint file."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        msg = f"cannot read checkpoint {path}: {e}"
        raise CheckpointError(msg) from e
    return decode(data)


def checkpoint_io(
    path: Path | str,
    direction: Direction | str,
    solver: AnySolver,
    state: AnyState | None = None,
) -> AnyState | None:
    """Write a state, or read one back into the solver's state type.

    Args:
        path: Checkpoint file
        direction: "write" or "read"
        solver: Solver of the run (its system and grid must match on read)
        state: State to write

    Returns:
        The restored state on read, None on write

    Raises:
        CheckpointFormatError: Malformed, truncated or wrong-version file
        CheckpointTagError: System or grid mismatch with the solver
        CheckpointError: I/O failure
    """
    direction = Direction(direction)
    if direction is Direction.WRITE:
        if state is None:
            msg = "no state given to write"
            raise CheckpointError(msg)
        write_checkpoint(path, solver, state)
        return None
    checkpoint = read_checkpoint(path)
    _check_matches(checkpoint, solver)
    logger.info(
        "path=<%s>, system=<%s>, t=<%s> | checkpoint loaded", path, checkpoint.system.value, checkpoint.t
    )
    return solver.restore(checkpoint.fields, checkpoint.t, checkpoint.step)
