"""Reference forward computations of the contrastive training objective.

These are the parity oracles an external training stack can check against:
the bidirectional global InfoNCE loss, the masked local loss built on the
late-interaction aggregations, the curriculum weight schedule, and their
weighted total. Forward only; no gradients.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimMismatch, EmptyMask, EpochOutOfRange, InvalidParams, InvalidTemperature
from .ids import parse_ids
from .similarity import s_i2t, s_t2i


@dataclass(frozen=True)
class BatchSample:
    """One paired sample: global and local embeddings for both modalities."""

    image_global: np.ndarray  # (d,)
    text_global: np.ndarray  # (d,)
    image_local: np.ndarray  # (N_p, d)
    text_local: np.ndarray  # (M, d)
    mask: tuple[int, ...]  # length M, 1 for radical tokens


@dataclass(frozen=True)
class Batch:
    """A validated batch of paired samples with a common embedding dim."""

    samples: tuple[BatchSample, ...]

    def __post_init__(self) -> None:
        if not self.samples:
            raise InvalidParams("batch must contain at least one sample")
        d = self.samples[0].image_global.shape[0]
        for i, s in enumerate(self.samples):
            dims = {
                s.image_global.shape[0],
                s.text_global.shape[0],
                s.image_local.shape[1],
                s.text_local.shape[1],
            }
            if dims != {d}:
                raise DimMismatch(f"sample {i}: embedding dims {sorted(dims)} != batch dim {d}")
            if len(s.mask) != s.text_local.shape[0]:
                raise DimMismatch(
                    f"sample {i}: mask length {len(s.mask)} != token rows {s.text_local.shape[0]}"
                )
            if sum(s.mask) == 0:
                raise EmptyMask(f"sample {i}: mask has no radical tokens")

    @property
    def size(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class CurriculumSchedule:
    """Epoch-dependent loss weights: warm-up, then linear decay/growth."""

    total_epochs: int
    warmup_epochs: int
    alpha: float = 0.8
    beta: float = 1.0

    def __post_init__(self) -> None:
        if self.total_epochs < 1:
            raise InvalidParams(f"total_epochs must be >= 1, got {self.total_epochs}")
        if not 0 <= self.warmup_epochs <= self.total_epochs:
            raise InvalidParams(
                f"warmup_epochs must be in [0, {self.total_epochs}], got {self.warmup_epochs}"
            )

    @classmethod
    def from_warmup_fraction(
        cls, total_epochs: int, fraction: float = 0.25, alpha: float = 0.8, beta: float = 1.0
    ) -> "CurriculumSchedule":
        """Build a schedule whose warm-up covers a fraction of training (ceiling)."""
        return cls(total_epochs, math.ceil(fraction * total_epochs), alpha, beta)


class LossBreakdown(NamedTuple):
    total: float
    global_loss: float
    local_loss: float
    weight_global: float
    weight_local: float


def _check_temperature(tau: float) -> None:
    if not math.isfinite(tau) or tau <= 0:
        raise InvalidTemperature(f"temperature must be finite and > 0, got {tau}")


def _symmetric_nce(scores: np.ndarray, tau: float) -> float:
    """Mean of the two InfoNCE directions over a (B, B) similarity matrix.

    Rows index the anchor modality; max-subtracted log-sum-exp in float64.
    """
    logits = scores / tau

    def direction(mat: np.ndarray) -> float:
        mx = mat.max(axis=1, keepdims=True)
        lse = mx[:, 0] + np.log(np.exp(mat - mx).sum(axis=1))
        return float(np.mean(lse - np.diag(mat)))

    return 0.5 * (direction(logits) + direction(logits.T))


def global_loss(batch: Batch, tau_g: float) -> float:
    """Bidirectional global contrastive loss over the batch."""
    _check_temperature(tau_g)
    v = np.stack([s.image_global for s in batch.samples]).astype(np.float64)
    t = np.stack([s.text_global for s in batch.samples]).astype(np.float64)
    return _symmetric_nce(v @ t.T, tau_g)


def local_loss(batch: Batch, tau_l: float) -> float:
    """Bidirectional local contrastive loss with masked max-response aggregation.

    The image-to-text direction varies the text index with S_I2T; the
    text-to-image direction varies the image index with S_T2I. Each pairwise
    score uses the text side's own mask.
    """
    _check_temperature(tau_l)
    b = batch.size
    i2t = np.empty((b, b))
    t2i = np.empty((b, b))
    for i, si in enumerate(batch.samples):
        for j, sj in enumerate(batch.samples):
            i2t[i, j] = s_i2t(si.image_local, sj.text_local, sj.mask)
            t2i[i, j] = s_t2i(si.image_local, sj.text_local, sj.mask)

    logits_i2t = i2t / tau_l
    # Text anchor i against image candidates j: column i of the t2i matrix.
    logits_t2i = (t2i / tau_l).T

    def direction(mat: np.ndarray) -> float:
        mx = mat.max(axis=1, keepdims=True)
        lse = mx[:, 0] + np.log(np.exp(mat - mx).sum(axis=1))
        return float(np.mean(lse - np.diag(mat)))

    return 0.5 * (direction(logits_i2t) + direction(logits_t2i))


def _check_epoch(t: int, sched: CurriculumSchedule) -> None:
    if not 0 <= t <= sched.total_epochs:
        raise EpochOutOfRange(f"epoch {t} outside [0, {sched.total_epochs}]")


def lambda1(t: int, sched: CurriculumSchedule) -> float:
    """Global-loss weight: 1.0 during warm-up, then linear decay by alpha."""
    _check_epoch(t, sched)
    if t < sched.warmup_epochs or sched.total_epochs == sched.warmup_epochs:
        return 1.0
    progress = (t - sched.warmup_epochs) / (sched.total_epochs - sched.warmup_epochs)
    return 1.0 - sched.alpha * progress


def lambda2(t: int, sched: CurriculumSchedule) -> float:
    """Local-loss weight: 1.0 during warm-up, then linear growth by beta."""
    _check_epoch(t, sched)
    if t < sched.warmup_epochs or sched.total_epochs == sched.warmup_epochs:
        return 1.0
    progress = (t - sched.warmup_epochs) / (sched.total_epochs - sched.warmup_epochs)
    return 1.0 + sched.beta * progress


def total_loss(
    batch: Batch, t: int, sched: CurriculumSchedule, tau_g: float, tau_l: float
) -> LossBreakdown:
    """Weighted total of the global and local losses at epoch ``t``."""
    g = global_loss(batch, tau_g)
    l = local_loss(batch, tau_l)
    w1 = lambda1(t, sched)
    w2 = lambda2(t, sched)
    return LossBreakdown(w1 * g + w2 * l, g, l, w1, w2)


def load_batch_jsonl(path: str | Path) -> Batch:
    """Read a paired batch from JSONL for cross-framework parity checks.

    Each line holds one sample: ``image_global``, ``text_global``,
    ``image_local``, ``text_local``, and either an explicit ``mask`` or an
    ``ids`` string from which the mask is derived.
    """
    samples = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            if "mask" in record:
                mask: Sequence[int] = record["mask"]
            elif "ids" in record:
                mask = parse_ids(record["ids"]).mask
            else:
                raise InvalidParams("batch record needs either 'mask' or 'ids'")
            samples.append(
                BatchSample(
                    image_global=np.asarray(record["image_global"], dtype=np.float64),
                    text_global=np.asarray(record["text_global"], dtype=np.float64),
                    image_local=np.atleast_2d(np.asarray(record["image_local"], dtype=np.float64)),
                    text_local=np.atleast_2d(np.asarray(record["text_local"], dtype=np.float64)),
                    mask=tuple(int(m) for m in mask),
                )
            )
    return Batch(tuple(samples))
