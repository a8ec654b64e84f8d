"""Numerical kernels: cosine, global scores, and masked local aggregations.

All kernels assume unit-normalized rows (enforced at the model boundary) and
accumulate in float64. The structure filtering mask restricts both local
aggregations to radical tokens; operator rows never enter any sum or max.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimMismatch, EmptyMask, IndexOutOfRange
from .model import CandidateIndex, QuerySample


@dataclass(frozen=True)
class ResponseMap:
    """Cosine responses of one textual token against every visual patch."""

    token_index: int
    values: np.ndarray  # (N_p,) float64 in [-1, 1]


def _as64(arr: np.ndarray) -> np.ndarray:
    return np.asarray(arr, dtype=np.float64)


def _check_dims(v: np.ndarray, t: np.ndarray) -> None:
    if v.shape[-1] != t.shape[-1]:
        raise DimMismatch(f"dim {v.shape[-1]} vs {t.shape[-1]}")


def _check_mask(t: np.ndarray, mask: Sequence[int]) -> np.ndarray:
    m = np.asarray(mask, dtype=bool)
    if m.shape[0] != t.shape[0]:
        raise DimMismatch(f"mask length {m.shape[0]} != token rows {t.shape[0]}")
    if not m.any():
        raise EmptyMask("all tokens are masked out; local similarity is undefined")
    return m


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity of two unit vectors, clamped to [-1, 1]."""
    u, v = _as64(u), _as64(v)
    _check_dims(u, v)
    return float(np.clip(np.dot(u, v), -1.0, 1.0))


def global_scores(query: QuerySample, index: CandidateIndex) -> np.ndarray:
    """Cosine of the query's global embedding against every candidate, in index order."""
    if query.dim != index.dim:
        raise DimMismatch(f"query dim {query.dim} != index dim {index.dim}")
    scores = index.global_matrix() @ _as64(query.global_vec)
    return np.clip(scores, -1.0, 1.0)


def s_i2t(v_local: np.ndarray, t_local: np.ndarray, mask: Sequence[int]) -> float:
    """Token-driven local similarity.

    For each radical token, take its strongest cosine response over all
    patches, then average over radical tokens only.
    """
    v, t = _as64(v_local), _as64(t_local)
    _check_dims(v, t)
    m = _check_mask(t, mask)
    sims = t[m] @ v.T  # (radical tokens, patches)
    return float(sims.max(axis=1).mean())


def s_t2i(v_local: np.ndarray, t_local: np.ndarray, mask: Sequence[int]) -> float:
    """Patch-driven local similarity.

    For each patch, take its strongest cosine response over radical tokens,
    then average over all patches.
    """
    v, t = _as64(v_local), _as64(t_local)
    _check_dims(v, t)
    m = _check_mask(t, mask)
    sims = v @ t[m].T  # (patches, radical tokens)
    return float(sims.max(axis=1).mean())


def response_map(v_local: np.ndarray, t_local: np.ndarray, token_index: int) -> ResponseMap:
    """Raw cosine responses of token ``token_index`` against every patch."""
    v, t = _as64(v_local), _as64(t_local)
    _check_dims(v, t)
    if not 0 <= token_index < t.shape[0]:
        raise IndexOutOfRange(f"token index {token_index} outside [0, {t.shape[0]})")
    return ResponseMap(token_index=token_index, values=v @ t[token_index])


def write_response_map_csv(rmap: ResponseMap, path: str | Path) -> None:
    """Export a response map as CSV with 9-significant-digit floats."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["patch_index", "response"])
        for n, value in enumerate(rmap.values):
            writer.writerow([n, f"{value:.9g}"])
