"""Metrics and the accuracy/latency K-sweep over a loaded index.

Recall@K is computed from the coarse global ranking (did the truth survive
candidate recall), Top-1 accuracy from the fused final ranking. Sweep timing
covers the scoring path only, with an untimed warm-up pass first; an opt-in
parallel mode measures throughput instead and is labelled as such.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InvalidParams, MissingTruth
from .inference import InferenceConfig, RankingResult, infer
from .model import CandidateIndex, QuerySample


@dataclass(frozen=True)
class SweepRow:
    """One K-sweep measurement; latency fields are per query in milliseconds."""

    k: int
    recall_at_k: float
    top1_acc: float
    latency_ms: float
    latency_p95_ms: float
    mode: str = "latency"
    throughput_qps: float | None = None


def _check_truths(results: Sequence[RankingResult], truths: Sequence[str | None]) -> list[str]:
    if len(results) != len(truths):
        raise InvalidParams(f"{len(results)} results for {len(truths)} truths")
    checked = []
    for i, (res, truth) in enumerate(zip(results, truths)):
        if truth is None:
            raise MissingTruth(f"query {i} has no ground-truth label")
        if truth not in res.coarse_labels:
            raise MissingTruth(f"query {i}: truth {truth!r} is not in the index")
        checked.append(truth)
    return checked


def recall_at_k(results: Sequence[RankingResult], truths: Sequence[str | None], k: int) -> float:
    """Fraction of queries whose truth appears in the coarse global Top-K."""
    if k < 1:
        raise InvalidParams(f"k must be >= 1, got {k}")
    checked = _check_truths(results, truths)
    hits = sum(
        truth in set(res.coarse_labels[:k]) for res, truth in zip(results, checked)
    )
    return hits / len(results)


def top1_accuracy(results: Sequence[RankingResult], truths: Sequence[str | None]) -> float:
    """Fraction of queries whose fused Top-1 equals the truth."""
    checked = _check_truths(results, truths)
    hits = sum(res.top1 == truth for res, truth in zip(results, checked))
    return hits / len(results)


def resolve_k_values(spec: Sequence[int | str], n_candidates: int) -> list[int]:
    """Expand a K list that may contain the literal ``"full"``."""
    out = []
    for k in spec:
        if isinstance(k, str):
            if k.strip().lower() != "full":
                raise InvalidParams(f"unknown k value {k!r}")
            out.append(n_candidates)
        else:
            if k < 1:
                raise InvalidParams(f"k must be >= 1, got {k}")
            out.append(int(k))
    if not out:
        raise InvalidParams("k list must be non-empty")
    return out


def sweep_k(
    index: CandidateIndex,
    queries: Sequence[QuerySample],
    k_values: Sequence[int | str],
    cfg: InferenceConfig | None = None,
    threads: int | None = None,
) -> list[SweepRow]:
    """Measure recall, Top-1 accuracy, and per-query scoring latency per K.

    With ``threads`` set, queries are scored on a thread pool and the rows
    report throughput (queries/second) instead of interpretable latency;
    their ``mode`` is ``"throughput"``.
    """
    if cfg is None:
        cfg = InferenceConfig()
    if not queries:
        raise InvalidParams("query set must be non-empty")
    ks = resolve_k_values(k_values, len(index))
    truths = [q.truth for q in queries]

    # Warm-up: populate the index caches and warm the kernels, untimed.
    from dataclasses import replace

    warm_cfg = replace(cfg, k=max(ks))
    infer(queries[0], index, warm_cfg)

    rows = []
    for k in ks:
        k_cfg = replace(cfg, k=k)
        if threads:
            start = time.perf_counter()
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(lambda q: infer(q, index, k_cfg), queries))
            elapsed = time.perf_counter() - start
            qps = len(queries) / elapsed
            per_query_ms = 1000.0 * elapsed / len(queries)
            rows.append(
                SweepRow(
                    k=k,
                    recall_at_k=recall_at_k(results, truths, k),
                    top1_acc=top1_accuracy(results, truths),
                    latency_ms=per_query_ms,
                    latency_p95_ms=per_query_ms,
                    mode="throughput",
                    throughput_qps=qps,
                )
            )
        else:
            results = []
            latencies = []
            for q in queries:
                start = time.perf_counter()
                results.append(infer(q, index, k_cfg))
                latencies.append(time.perf_counter() - start)
            lat = 1000.0 * np.asarray(latencies)
            rows.append(
                SweepRow(
                    k=k,
                    recall_at_k=recall_at_k(results, truths, k),
                    top1_acc=top1_accuracy(results, truths),
                    latency_ms=float(lat.mean()),
                    latency_p95_ms=float(np.percentile(lat, 95)),
                )
            )
    return rows


def write_sweep_csv(rows: Sequence[SweepRow], path: str | Path) -> None:
    """Write sweep rows with a fixed column order for external plotting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["k", "recall_at_k", "top1_acc", "latency_ms", "latency_p95_ms", "mode", "throughput_qps"]
        )
        for row in rows:
            writer.writerow(
                [
                    row.k,
                    f"{row.recall_at_k:.6f}",
                    f"{row.top1_acc:.6f}",
                    f"{row.latency_ms:.6f}",
                    f"{row.latency_p95_ms:.6f}",
                    row.mode,
                    "" if row.throughput_qps is None else f"{row.throughput_qps:.3f}",
                ]
            )
