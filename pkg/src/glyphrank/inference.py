"""Coarse-to-fine hierarchical inference.

Global cosine ranking over the full candidate set, Top-K selection, masked
patch-driven local reranking of the Top-K only, softmax normalization of both
score vectors over the Top-K set, and multiplicative fusion of the two
posteriors. The exhaustive mode forces K to the full candidate count and
serves as the correctness oracle for the hierarchical path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import DimMismatch, InvalidParams, InvalidTemperature, LengthMismatch
from .model import CandidateIndex, QuerySample
from .similarity import global_scores

DEFAULT_K = 50
DEFAULT_TAU = 0.07


@dataclass(frozen=True)
class InferenceConfig:
    k: int = DEFAULT_K
    tau_g: float = DEFAULT_TAU
    tau_l: float = DEFAULT_TAU

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InvalidParams(f"k must be >= 1, got {self.k}")
        for name, tau in (("tau_g", self.tau_g), ("tau_l", self.tau_l)):
            if not math.isfinite(tau) or tau <= 0:
                raise InvalidTemperature(f"{name} must be finite and > 0, got {tau}")


class RankingEntry(NamedTuple):
    """Scores for one candidate; fine-stage fields are None outside the Top-K."""

    label: str
    index: int
    s_global: float
    s_local: float | None = None
    p_global: float | None = None
    p_local: float | None = None
    s_final: float | None = None


@dataclass(frozen=True)
class RankingResult:
    """Full ranking: fused Top-K entries first, then the coarse-only tail."""

    entries: tuple[RankingEntry, ...]
    k: int
    coarse_labels: tuple[str, ...] = field(repr=False)

    @property
    def top1(self) -> str:
        return self.entries[0].label

    @property
    def topk_entries(self) -> tuple[RankingEntry, ...]:
        return self.entries[: self.k]


def select_topk(scores: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest scores, descending, ties by ascending index."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise InvalidParams("scores must be non-empty")
    k = min(max(k, 1), scores.size)
    # Stable sort of -scores keeps equal scores in ascending index order.
    order = np.argsort(-scores, kind="stable")
    return order[:k]


def normalize_topk(scores: np.ndarray, tau: float) -> np.ndarray:
    """Temperature softmax over a Top-K score vector, max-subtracted."""
    if not math.isfinite(tau) or tau <= 0:
        raise InvalidTemperature(f"temperature must be finite and > 0, got {tau}")
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise InvalidParams("scores must be non-empty")
    logits = scores / tau
    e = np.exp(logits - logits.max())
    return e / e.sum()


def fuse(p_global: np.ndarray, p_local: np.ndarray) -> np.ndarray:
    """Element-wise product of the two posteriors (not re-normalized)."""
    p_global = np.asarray(p_global, dtype=np.float64)
    p_local = np.asarray(p_local, dtype=np.float64)
    if p_global.shape != p_local.shape:
        raise LengthMismatch(f"shape {p_global.shape} vs {p_local.shape}")
    return p_global * p_local


def local_scores_t2i(query: QuerySample, index: CandidateIndex, positions: np.ndarray) -> np.ndarray:
    """Patch-driven local similarity of the query against selected candidates.

    Batched equivalent of ``similarity.s_t2i`` over the index's concatenated
    radical rows; operator rows never exist in that cache, so they cannot
    influence any score. Returns one score per entry of ``positions``.
    """
    rows, starts, counts = index.radical_stack()
    v = query.local.astype(np.float64)  # (N_p, d)
    positions = np.asarray(positions, dtype=np.intp)
    if positions.size == len(index):
        # Full set (any order): score everything once, then reorder.
        sims = rows @ v.T
        per_cand = np.maximum.reduceat(sims, starts, axis=0)
        return per_cand.mean(axis=1)[positions]
    sel = np.concatenate(
        [np.arange(starts[p], starts[p] + counts[p]) for p in positions]
    )
    sel_starts = np.zeros(positions.size, dtype=np.intp)
    np.cumsum(counts[positions][:-1], out=sel_starts[1:])
    sims = rows[sel] @ v.T
    per_cand = np.maximum.reduceat(sims, sel_starts, axis=0)
    return per_cand.mean(axis=1)


def infer(query: QuerySample, index: CandidateIndex, cfg: InferenceConfig) -> RankingResult:
    """Run the full coarse-to-fine pipeline for one query."""
    if query.dim != index.dim:
        raise DimMismatch(f"query dim {query.dim} != index dim {index.dim}")
    s_global = global_scores(query, index)
    n = len(index)
    coarse_order = select_topk(s_global, n)
    k = min(cfg.k, n)
    topk = coarse_order[:k]

    s_local = local_scores_t2i(query, index, topk)
    p_global = normalize_topk(s_global[topk], cfg.tau_g)
    p_local = normalize_topk(s_local, cfg.tau_l)
    s_final = fuse(p_global, p_local)

    # Fused order within Top-K: score descending, ties by candidate index.
    fused_order = np.lexsort((topk, -s_final))

    labels = index.labels
    topk_l = topk.tolist()
    sg_top = s_global[topk].tolist()
    sl_l = s_local.tolist()
    pg_l = p_global.tolist()
    pl_l = p_local.tolist()
    sf_l = s_final.tolist()
    entries = [
        RankingEntry(labels[topk_l[pos]], topk_l[pos], sg_top[pos], sl_l[pos], pg_l[pos], pl_l[pos], sf_l[pos])
        for pos in fused_order.tolist()
    ]
    tail = coarse_order[k:].tolist()
    sg_all = s_global.tolist()
    entries.extend(RankingEntry(labels[idx], idx, sg_all[idx]) for idx in tail)
    coarse_labels = tuple(labels[i] for i in coarse_order.tolist())
    return RankingResult(entries=tuple(entries), k=k, coarse_labels=coarse_labels)


def infer_exhaustive(query: QuerySample, index: CandidateIndex, cfg: InferenceConfig) -> RankingResult:
    """Hierarchical inference with K forced to the full candidate count."""
    return infer(query, index, replace(cfg, k=len(index)))
