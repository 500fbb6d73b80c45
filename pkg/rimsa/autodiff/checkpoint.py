"""
Flat binary parameter checkpoints.

Layout (little-endian):
    b"RMCK" | u32 version | u32 count
    per parameter: u32 name_len | name (utf-8) | u8 frozen | u32 rank | u32 dims[rank] | f8 data
"""

from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, List, Union
import struct

import numpy as np
import structlog

from rimsa.autodiff.tensor import Parameter
from rimsa.errors import FormatError, ShapeError

logger = structlog.get_logger(__name__)

MAGIC = b"RMCK"
VERSION = 1

_U32 = struct.Struct("<I")
_U8 = struct.Struct("<B")


@dataclass(frozen=True)
class ParameterRecord:
    name: str
    frozen: bool
    data: np.ndarray


def _read_exact(fh: BinaryIO, n: int, what: str) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise FormatError(f"bad checkpoint: truncated while reading {what}")
    return buf


def _read_u32(fh: BinaryIO, what: str) -> int:
    return _U32.unpack(_read_exact(fh, 4, what))[0]


def save_checkpoint(path: Union[str, Path], params: Iterable[Parameter]) -> int:
    """Write every parameter in order; returns the number written."""
    params = list(params)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_U32.pack(VERSION))
        fh.write(_U32.pack(len(params)))
        for p in params:
            name = p.name.encode("utf-8")
            fh.write(_U32.pack(len(name)))
            fh.write(name)
            fh.write(_U8.pack(1 if p.frozen else 0))
            fh.write(_U32.pack(p.data.ndim))
            for dim in p.data.shape:
                fh.write(_U32.pack(dim))
            fh.write(np.ascontiguousarray(p.data, dtype="<f8").tobytes())
    logger.info("checkpoint saved", path=str(path), parameters=len(params))
    return len(params)


def read_checkpoint(path: Union[str, Path]) -> List[ParameterRecord]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise FormatError(f"bad checkpoint: {path} has magic {magic!r}, expected {MAGIC!r}")
        version = _read_u32(fh, "version")
        if version != VERSION:
            raise FormatError(f"bad checkpoint: unsupported version {version} (expected {VERSION})")
        count = _read_u32(fh, "parameter count")

        records = []
        for i in range(count):
            name_len = _read_u32(fh, f"name length of parameter {i}")
            name = _read_exact(fh, name_len, f"name of parameter {i}").decode("utf-8")
            frozen = bool(_U8.unpack(_read_exact(fh, 1, f"frozen flag of {name}"))[0])
            rank = _read_u32(fh, f"rank of {name}")
            shape = tuple(_read_u32(fh, f"dims of {name}") for _ in range(rank))
            n_values = int(np.prod(shape, dtype=np.int64))
            raw = _read_exact(fh, 8 * n_values, f"values of {name}")
            data = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)
            records.append(ParameterRecord(name=name, frozen=frozen, data=data))

        if fh.read(1):
            raise FormatError(f"bad checkpoint: trailing bytes after {count} parameters")
    return records


def load_checkpoint(path: Union[str, Path], params: Iterable[Parameter]) -> None:
    """Copy values and frozen flags from a checkpoint into matching parameters by name."""
    records = {r.name: r for r in read_checkpoint(path)}
    params = list(params)
    expected = {p.name for p in params}
    missing = expected - records.keys()
    unexpected = records.keys() - expected
    if missing or unexpected:
        raise ShapeError(
            f"checkpoint {path} does not match the model: missing {sorted(missing)}, "
            f"unexpected {sorted(unexpected)}"
        )
    for p in params:
        rec = records[p.name]
        if rec.data.shape != p.data.shape:
            raise ShapeError(
                f"checkpoint parameter '{p.name}' has shape {rec.data.shape}, "
                f"model expects {p.data.shape}"
            )
        p.data = rec.data.copy()
        p.frozen = rec.frozen
    logger.info("checkpoint loaded", path=str(path), parameters=len(params))
