"""Scikit-learn style wrapper around the hierarchical inference engine.

``GlyphRankClassifier`` fits on a candidate index (or an iterable of
candidates) and predicts labels for query samples, so the engine composes
with sklearn tooling (``get_params``/``set_params``, ``clone``, scoring).
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .inference import DEFAULT_TAU, InferenceConfig, RankingResult, infer
from .model import Candidate, CandidateIndex, QuerySample


class GlyphRankClassifier(ClassifierMixin, BaseEstimator):
    """Coarse-to-fine zero-shot character classifier over precomputed embeddings.

    Parameters
    ----------
    k : size of the coarse recall candidate set.
    tau_g, tau_l : softmax temperatures for the global and local posteriors.
    """

    def __init__(self, k: int = 50, tau_g: float = DEFAULT_TAU, tau_l: float = DEFAULT_TAU):
        self.k = k
        self.tau_g = tau_g
        self.tau_l = tau_l

    def fit(self, X: CandidateIndex | Iterable[Candidate], y=None) -> "GlyphRankClassifier":
        """Fit on the candidate set; ``y`` is ignored (labels live on candidates)."""
        self.index_ = X if isinstance(X, CandidateIndex) else CandidateIndex(list(X))
        self.classes_ = np.asarray(self.index_.labels, dtype=object)
        return self

    def _config(self) -> InferenceConfig:
        return InferenceConfig(k=self.k, tau_g=self.tau_g, tau_l=self.tau_l)

    def _check_fitted(self) -> None:
        if not hasattr(self, "index_"):
            raise NotFittedError("GlyphRankClassifier is not fitted; call fit() first")

    def rank(self, X: Sequence[QuerySample]) -> list[RankingResult]:
        """Full ranking results for each query."""
        self._check_fitted()
        cfg = self._config()
        return [infer(q, self.index_, cfg) for q in X]

    def predict(self, X: Sequence[QuerySample]) -> np.ndarray:
        """Top-1 label for each query."""
        return np.asarray([r.top1 for r in self.rank(X)], dtype=object)

    def decision_function(self, X: Sequence[QuerySample]) -> np.ndarray:
        """Fused scores aligned to ``classes_``; 0 for candidates outside the Top-K."""
        self._check_fitted()
        out = np.zeros((len(X), len(self.classes_)))
        for row, result in enumerate(self.rank(X)):
            for entry in result.topk_entries:
                out[row, entry.index] = entry.s_final
        return out
