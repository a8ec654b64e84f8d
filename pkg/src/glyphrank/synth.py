"""Synthetic embedding generator for end-to-end testing without neural encoders.

Characters are modelled as recombinations of a small pool of radical
prototypes: each synthetic candidate gets a random well-formed IDS over the
pool, token embeddings near the matching prototypes, and a global embedding
equal to the normalized mean of its radical prototypes. Queries are noisy
views of a chosen candidate, so at noise 0 exhaustive inference recovers the
source candidate exactly.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidParams
from .ids import parse_ids, random_ids_text
from .model import CandidateIndex, QuerySample, make_candidate, make_query

#: Scale of the per-token perturbation applied to radical prototypes.
TOKEN_JITTER = 0.01

#: Attempts to find an unused radical combination before giving up.
_MAX_RETRIES = 1000

_CJK_BASE = 0x4E00
_PUA_BASE = 0xE000
_PUA_SIZE = 0xF900 - 0xE000
_PUA_SUPPLEMENTARY = 0xF0000


def _candidate_label(j: int) -> str:
    cp = _PUA_BASE + j if j < _PUA_SIZE else _PUA_SUPPLEMENTARY + (j - _PUA_SIZE)
    return chr(cp)


def _unit(rows: np.ndarray) -> np.ndarray:
    return rows / np.linalg.norm(rows, axis=-1, keepdims=True)


def synth_generate(
    seed: int,
    n_radicals: int,
    n_candidates: int,
    d: int,
    n_patches: int,
    noise: float,
    n_queries: int | None = None,
) -> tuple[CandidateIndex, list[QuerySample]]:
    """Build a deterministic synthetic index and query set.

    Args:
        seed: RNG seed; identical seeds give bit-identical outputs.
        n_radicals: size of the radical prototype pool (>= 2).
        n_candidates: number of candidate categories, each with a distinct
            radical set so that noise-free queries have a unique best match.
        d: embedding dimension (>= 4).
        n_patches: patches per query (>= 1).
        noise: per-component Gaussian σ applied to query embeddings (>= 0).
        n_queries: number of queries; defaults to ``n_candidates``.

    Raises:
        InvalidParams: any argument outside its domain, or the pool is too
            small to give every candidate a distinct radical set.
    """
    if n_radicals < 2:
        raise InvalidParams(f"n_radicals must be >= 2, got {n_radicals}")
    if d < 4:
        raise InvalidParams(f"d must be >= 4, got {d}")
    if n_patches < 1:
        raise InvalidParams(f"n_patches must be >= 1, got {n_patches}")
    if n_candidates < 1:
        raise InvalidParams(f"n_candidates must be >= 1, got {n_candidates}")
    if noise < 0:
        raise InvalidParams(f"noise must be >= 0, got {noise}")
    if n_radicals > 20000:
        raise InvalidParams(f"n_radicals must be <= 20000, got {n_radicals}")
    if n_queries is None:
        n_queries = n_candidates
    if n_queries < 1:
        raise InvalidParams(f"n_queries must be >= 1, got {n_queries}")

    rng = np.random.default_rng(seed)
    radical_chars = [chr(_CJK_BASE + i) for i in range(n_radicals)]
    prototypes = _unit(rng.standard_normal((n_radicals, d)))
    proto_of = {c: prototypes[i] for i, c in enumerate(radical_chars)}

    candidates = []
    proto_means = []  # normalized mean of radical prototypes, float64
    seen_sets: set[frozenset[str]] = set()
    for j in range(n_candidates):
        for attempt in range(_MAX_RETRIES):
            ids_text = random_ids_text(rng, radical_chars)
            seq = parse_ids(ids_text)
            key = frozenset(t.char for t in seq.tokens if t.is_radical)
            if key not in seen_sets:
                seen_sets.add(key)
                break
        else:
            raise InvalidParams(
                f"could not draw {n_candidates} distinct radical sets from "
                f"{n_radicals} radicals"
            )
        protos = np.stack([proto_of[t.char] for t in seq.tokens if t.is_radical])
        local = np.empty((len(seq), d))
        for i, tok in enumerate(seq.tokens):
            if tok.is_radical:
                local[i] = proto_of[tok.char] + TOKEN_JITTER * rng.standard_normal(d)
            else:
                local[i] = rng.standard_normal(d)
        local = _unit(local)
        global_vec = _unit(protos.mean(axis=0))
        candidates.append(
            make_candidate(_candidate_label(j), seq, global_vec.astype(np.float32), local.astype(np.float32))
        )
        proto_means.append(global_vec)

    radical_runs = [
        np.stack([proto_of[t.char] for t in c.ids.tokens if t.is_radical]) for c in candidates
    ]

    queries = []
    for q in range(n_queries):
        src = int(rng.integers(n_candidates))
        protos = radical_runs[src]
        patches = protos[np.arange(n_patches) % protos.shape[0]]
        patches = _unit(patches + noise * rng.standard_normal((n_patches, d)))
        global_vec = _unit(protos.mean(axis=0) + noise * rng.standard_normal(d))
        queries.append(
            make_query(
                f"q{q:05d}",
                global_vec.astype(np.float32),
                patches.astype(np.float32),
                truth=candidates[src].label,
            )
        )
    return CandidateIndex(candidates), queries
