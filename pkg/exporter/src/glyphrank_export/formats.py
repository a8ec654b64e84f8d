"""Writers for the engine's GLIX/GLQY wire formats.

The formats are the published interface between the exporter and the engine,
so they are implemented here directly rather than by importing the engine.

Layout (little-endian): magic ``GLIX``/``GLQY`` | version u32 (=1) | dim u32
| count u32; per record a u16-length UTF-8 string (label or query id), a
second u16-length UTF-8 string (IDS text, or ground-truth label with length 0
meaning absent), a u16 row count, the d-float32 global vector, and the
rows×d float32 local matrix. All rows must be unit ℓ2-normalized.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import BinaryIO, Iterable

import numpy as np

from .errors import ShapeMismatch

INDEX_MAGIC = b"GLIX"
QUERY_MAGIC = b"GLQY"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<III")
_U16 = struct.Struct("<H")


def _write_str(fh: BinaryIO, text: str) -> None:
    data = text.encode("utf-8")
    if len(data) > 0xFFFF:
        raise ShapeMismatch(f"string too long for u16 length prefix: {len(data)} bytes")
    fh.write(_U16.pack(len(data)))
    fh.write(data)


def _write_record(fh: BinaryIO, name: str, text: str, global_vec: np.ndarray, local: np.ndarray, dim: int) -> None:
    if global_vec.shape != (dim,):
        raise ShapeMismatch(f"{name}: global shape {global_vec.shape}, expected ({dim},)")
    if local.ndim != 2 or local.shape[1] != dim:
        raise ShapeMismatch(f"{name}: local shape {local.shape}, expected (rows, {dim})")
    _write_str(fh, name)
    _write_str(fh, text)
    fh.write(_U16.pack(local.shape[0]))
    fh.write(np.ascontiguousarray(global_vec, dtype="<f4").tobytes())
    fh.write(np.ascontiguousarray(local, dtype="<f4").tobytes())


def write_index(
    path: str | Path,
    dim: int,
    records: Iterable[tuple[str, str, np.ndarray, np.ndarray]],
) -> int:
    """Write (label, ids_text, global, local) records as GLIX; returns count."""
    return _write_file(path, INDEX_MAGIC, dim, records)


def write_queries(
    path: str | Path,
    dim: int,
    records: Iterable[tuple[str, str, np.ndarray, np.ndarray]],
) -> int:
    """Write (id, truth-or-empty, global, local) records as GLQY; returns count."""
    return _write_file(path, QUERY_MAGIC, dim, records)


def _write_file(path, magic, dim, records) -> int:
    records = list(records)
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(_HEADER.pack(FORMAT_VERSION, dim, len(records)))
        for name, text, global_vec, local in records:
            _write_record(fh, name, text, global_vec, local, dim)
    return len(records)
