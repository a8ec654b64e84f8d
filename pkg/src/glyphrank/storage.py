"""Binary (GLIX/GLQY) and JSON Lines serialization of indexes and query sets.

GLIX layout (all integers little-endian):
    magic ``GLIX`` | version u32 (=1) | dim u32 | count u32
    per candidate:
        label bytes u16 + UTF-8 label
        IDS bytes u16 + UTF-8 IDS
        M u16 | d × f32 global | M × d × f32 local

GLQY is analogous for queries: the query id replaces the label, an optional
truth label replaces the IDS (byte-length 0 = absent), and N_p replaces M.

The JSONL debug format stores the same fields losslessly, one record per line,
with floats as shortest round-trip decimals.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import BinaryIO

import numpy as np

from .errors import BadMagic, CorruptFile, DimMismatch, InvalidParams, RowMismatch, VersionMismatch
from .ids import parse_ids
from .model import CandidateIndex, QuerySample, make_candidate, make_query

INDEX_MAGIC = b"GLIX"
QUERY_MAGIC = b"GLQY"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<III")
_U16 = struct.Struct("<H")


def _read_exact(fh: BinaryIO, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise CorruptFile(f"unexpected end of file while reading {what}")
    return data


def _read_u16(fh: BinaryIO, what: str) -> int:
    return _U16.unpack(_read_exact(fh, 2, what))[0]


def _read_str(fh: BinaryIO, what: str) -> str:
    n = _read_u16(fh, f"{what} length")
    try:
        return _read_exact(fh, n, what).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorruptFile(f"{what} is not valid UTF-8") from exc


def _write_str(fh: BinaryIO, text: str) -> None:
    data = text.encode("utf-8")
    if len(data) > 0xFFFF:
        raise InvalidParams(f"string too long for u16 length prefix: {len(data)} bytes")
    fh.write(_U16.pack(len(data)))
    fh.write(data)


def _write_f32(fh: BinaryIO, arr: np.ndarray) -> None:
    fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def _read_f32(fh: BinaryIO, count: int, what: str) -> np.ndarray:
    data = _read_exact(fh, count * 4, what)
    return np.frombuffer(data, dtype="<f4").copy()


def _read_header(fh: BinaryIO, magic: bytes, path) -> tuple[int, int]:
    got = fh.read(4)
    if got != magic:
        raise BadMagic(f"{path}: expected magic {magic!r}, got {got!r}")
    version, dim, count = _HEADER.unpack(_read_exact(fh, _HEADER.size, "header"))
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"{path}: format version {version}, supported is {FORMAT_VERSION}")
    return dim, count


def save_index(index: CandidateIndex, path: str | Path) -> None:
    """Write a candidate index in GLIX format (canonical serialization)."""
    with open(path, "wb") as fh:
        fh.write(INDEX_MAGIC)
        fh.write(_HEADER.pack(FORMAT_VERSION, index.dim, len(index)))
        for cand in index:
            _write_str(fh, cand.label)
            _write_str(fh, cand.ids.text)
            fh.write(_U16.pack(cand.local.shape[0]))
            _write_f32(fh, cand.global_vec)
            _write_f32(fh, cand.local)


def load_index(path: str | Path) -> CandidateIndex:
    """Load and validate a GLIX file; embeddings are re-normalized at the boundary."""
    with open(path, "rb") as fh:
        dim, count = _read_header(fh, INDEX_MAGIC, path)
        candidates = []
        for rec in range(count):
            where = f"record {rec}"
            label = _read_str(fh, f"{where} label")
            ids_text = _read_str(fh, f"{where} IDS")
            m = _read_u16(fh, f"{where} token count")
            ids_seq = parse_ids(ids_text)
            if len(ids_seq) != m:
                raise RowMismatch(
                    f"{path}: {where}: stored M={m} but IDS {ids_text!r} has {len(ids_seq)} tokens"
                )
            global_vec = _read_f32(fh, dim, f"{where} global")
            local = _read_f32(fh, m * dim, f"{where} local").reshape(m, dim)
            candidates.append(make_candidate(label, ids_seq, global_vec, local))
        if fh.read(1):
            raise CorruptFile(f"{path}: trailing bytes after {count} records")
    return CandidateIndex(candidates)


def save_queries(queries: list[QuerySample], path: str | Path, dim: int | None = None) -> None:
    """Write a query set in GLQY format."""
    if not queries:
        raise InvalidParams("query set must be non-empty")
    d = dim if dim is not None else queries[0].dim
    with open(path, "wb") as fh:
        fh.write(QUERY_MAGIC)
        fh.write(_HEADER.pack(FORMAT_VERSION, d, len(queries)))
        for q in queries:
            if q.dim != d:
                raise DimMismatch(f"query {q.id!r} has dim {q.dim}, file dim is {d}")
            _write_str(fh, q.id)
            _write_str(fh, q.truth or "")
            fh.write(_U16.pack(q.local.shape[0]))
            _write_f32(fh, q.global_vec)
            _write_f32(fh, q.local)


def load_queries(path: str | Path) -> list[QuerySample]:
    """Load and validate a GLQY file."""
    with open(path, "rb") as fh:
        dim, count = _read_header(fh, QUERY_MAGIC, path)
        queries = []
        for rec in range(count):
            where = f"record {rec}"
            qid = _read_str(fh, f"{where} id")
            truth = _read_str(fh, f"{where} truth") or None
            n_p = _read_u16(fh, f"{where} patch count")
            global_vec = _read_f32(fh, dim, f"{where} global")
            local = _read_f32(fh, n_p * dim, f"{where} local").reshape(n_p, dim)
            queries.append(make_query(qid, global_vec, local, truth))
        if fh.read(1):
            raise CorruptFile(f"{path}: trailing bytes after {count} records")
    return queries


def _floats(arr: np.ndarray) -> list:
    return [float(x) for x in np.asarray(arr).ravel()]


def _matrix(arr: np.ndarray) -> list[list[float]]:
    return [[float(x) for x in row] for row in np.asarray(arr)]


def save_index_jsonl(index: CandidateIndex, path: str | Path) -> None:
    """Debug JSONL export of an index, lossless for labels and IDS."""
    with open(path, "w", encoding="utf-8") as fh:
        for cand in index:
            record = {
                "label": cand.label,
                "ids": cand.ids.text,
                "global": _floats(cand.global_vec),
                "local": _matrix(cand.local),
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_index_jsonl(path: str | Path) -> CandidateIndex:
    """Load the debug JSONL index format."""
    candidates = []
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            global_vec = np.asarray(record["global"], dtype=np.float32)
            local = np.asarray(record["local"], dtype=np.float32)
            if dim is None:
                dim = global_vec.shape[0]
            elif global_vec.shape[0] != dim:
                raise DimMismatch(f"{path}:{lineno}: dim {global_vec.shape[0]} != {dim}")
            candidates.append(
                make_candidate(record["label"], parse_ids(record["ids"]), global_vec, local)
            )
    return CandidateIndex(candidates)


def save_queries_jsonl(queries: list[QuerySample], path: str | Path) -> None:
    """Debug JSONL export of a query set."""
    with open(path, "w", encoding="utf-8") as fh:
        for q in queries:
            record = {
                "id": q.id,
                "truth": q.truth,
                "global": _floats(q.global_vec),
                "local": _matrix(q.local),
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_queries_jsonl(path: str | Path) -> list[QuerySample]:
    """Load the debug JSONL query format."""
    queries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            queries.append(
                make_query(
                    record["id"],
                    np.asarray(record["global"], dtype=np.float32),
                    np.asarray(record["local"], dtype=np.float32),
                    record.get("truth"),
                )
            )
    return queries
