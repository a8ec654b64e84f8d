"""Embedding data model: candidates, the candidate index, and query samples.

Embeddings are plain numpy arrays: global vectors of shape (d,), local sets of
shape (rows, d). Rows are unit ℓ2-normalized at the module boundary (float32
storage, float64 accumulation inside kernels); the hot paths assume unit rows
and never re-normalize.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimMismatch, DuplicateLabel, InvalidParams, NoRadical, RowMismatch, ZeroVector
from .ids import IdsSequence

#: A row counts as normalized when its norm is within this of 1.
NORM_TOL = 1e-5

#: Rows with norm below this are rejected as zero vectors.
ZERO_NORM = 1e-8


def normalize_rows(arr: np.ndarray, context: str = "embedding") -> np.ndarray:
    """Return a float32 copy with unit ℓ2 rows.

    Rows already within NORM_TOL of unit norm are passed through bit-exactly so
    that save → load → save round-trips are byte-identical.

    Raises:
        ZeroVector: a row has norm < 1e-8 or contains NaN/Inf.
    """
    arr = np.asarray(arr, dtype=np.float32)
    if not np.all(np.isfinite(arr)):
        raise ZeroVector(f"{context}: non-finite values")
    squeeze = arr.ndim == 1
    mat = arr.reshape(1, -1) if squeeze else arr
    norms = np.linalg.norm(mat.astype(np.float64), axis=1)
    if np.any(norms < ZERO_NORM):
        row = int(np.argmax(norms < ZERO_NORM))
        raise ZeroVector(f"{context}: row {row} has norm {norms[row]:.3g}")
    off = np.abs(norms - 1.0) > NORM_TOL
    if np.any(off):
        mat = mat.copy()
        mat[off] = (mat[off].astype(np.float64) / norms[off, None]).astype(np.float32)
    return mat[0] if squeeze else mat


@dataclass(frozen=True)
class Candidate:
    """One candidate category: label, parsed IDS, and its embeddings."""

    label: str
    ids: IdsSequence
    global_vec: np.ndarray  # (d,) float32, unit norm
    local: np.ndarray  # (M, d) float32, unit rows; M == len(ids)

    @property
    def dim(self) -> int:
        return int(self.global_vec.shape[0])


@dataclass(frozen=True)
class QuerySample:
    """One query image's embeddings plus an optional ground-truth label."""

    id: str
    global_vec: np.ndarray  # (d,) float32, unit norm
    local: np.ndarray  # (N_p, d) float32, unit rows
    truth: str | None = None

    @property
    def dim(self) -> int:
        return int(self.global_vec.shape[0])

    @property
    def n_patches(self) -> int:
        return int(self.local.shape[0])


def make_candidate(label: str, ids: IdsSequence, global_vec, local) -> Candidate:
    """Validate and normalize raw arrays into a Candidate.

    Raises:
        RowMismatch: local row count differs from the IDS token count.
        NoRadical: the IDS mask is all-zero.
        DimMismatch: global and local dims differ.
    """
    g = normalize_rows(global_vec, context=f"candidate {label!r} global")
    loc = normalize_rows(np.atleast_2d(local), context=f"candidate {label!r} local")
    if loc.shape[0] != len(ids):
        raise RowMismatch(
            f"candidate {label!r}: {loc.shape[0]} local rows for {len(ids)} IDS tokens"
        )
    if loc.shape[1] != g.shape[0]:
        raise DimMismatch(f"candidate {label!r}: local dim {loc.shape[1]} != global dim {g.shape[0]}")
    if ids.radical_count == 0:
        raise NoRadical(f"candidate {label!r}: IDS {ids.text!r} has no radical tokens")
    return Candidate(label=label, ids=ids, global_vec=g, local=loc)


def make_query(id: str, global_vec, local, truth: str | None = None) -> QuerySample:
    g = normalize_rows(global_vec, context=f"query {id!r} global")
    loc = normalize_rows(np.atleast_2d(local), context=f"query {id!r} local")
    if loc.shape[1] != g.shape[0]:
        raise DimMismatch(f"query {id!r}: local dim {loc.shape[1]} != global dim {g.shape[0]}")
    return QuerySample(id=id, global_vec=g, local=loc, truth=truth)


@dataclass
class CandidateIndex:
    """The full candidate set, immutable after construction.

    Caches a stacked float64 global matrix and a padded local tensor for the
    batched inference kernels; both are derived lazily from the candidates.
    """

    candidates: list[Candidate]
    _positions: dict[str, int] = field(init=False, repr=False)
    _labels: list[str] | None = field(default=None, init=False, repr=False)
    _global_matrix: np.ndarray | None = field(default=None, init=False, repr=False)
    _local_stack: tuple[np.ndarray, np.ndarray] | None = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.candidates:
            raise InvalidParams("candidate index must be non-empty")
        d = self.candidates[0].dim
        positions: dict[str, int] = {}
        for pos, cand in enumerate(self.candidates):
            if cand.dim != d or cand.local.shape[1] != d:
                raise DimMismatch(f"candidate {cand.label!r} has dim {cand.dim}, index dim is {d}")
            if cand.label in positions:
                raise DuplicateLabel(f"duplicate candidate label {cand.label!r}")
            positions[cand.label] = pos
        self._positions = positions

    @property
    def dim(self) -> int:
        return self.candidates[0].dim

    def __len__(self) -> int:
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    def __getitem__(self, pos: int) -> Candidate:
        return self.candidates[pos]

    @property
    def labels(self) -> list[str]:
        if self._labels is None:
            self._labels = [c.label for c in self.candidates]
        return self._labels

    def position(self, label: str) -> int:
        return self._positions[label]

    def __contains__(self, label: str) -> bool:
        return label in self._positions

    def global_matrix(self) -> np.ndarray:
        """All candidate global vectors stacked as float64, shape (n, d)."""
        if self._global_matrix is None:
            self._global_matrix = np.stack(
                [c.global_vec.astype(np.float64) for c in self.candidates]
            )
        return self._global_matrix

    def radical_stack(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Radical-token rows of every candidate, concatenated for batched kernels.

        Returns (rows, starts, counts): rows is float64 of shape
        (total_radicals, d) holding only radical-token embeddings in candidate
        order; candidate i owns rows[starts[i] : starts[i] + counts[i]].
        Operator rows are simply absent, so they cannot influence any
        aggregation.
        """
        if self._local_stack is None:
            blocks = []
            counts = np.empty(len(self), dtype=np.intp)
            for i, cand in enumerate(self.candidates):
                mask = np.asarray(cand.ids.mask, dtype=bool)
                blocks.append(cand.local[mask].astype(np.float64))
                counts[i] = int(mask.sum())
            rows = np.vstack(blocks)
            starts = np.zeros(len(self), dtype=np.intp)
            np.cumsum(counts[:-1], out=starts[1:])
            self._local_stack = (rows, starts, counts)
        return self._local_stack
