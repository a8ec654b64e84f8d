"""Checkpoint → GLIX/GLQY export.

Checkpoints are resolved through a small adapter registry keyed by the
``arch`` string stored in the checkpoint, so new encoder architectures only
need an adapter exposing ``encode_text`` / ``encode_image`` and dim/patch
metadata — nothing here hard-codes a backbone.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Protocol

import torch

from . import formats
from .errors import MissingIds, ShapeMismatch
from .toy import ARCH_NAME, ToyConfig, ToyDualEncoder


class EncoderAdapter(Protocol):
    """What the export pipeline needs from a checkpoint."""

    dim: int
    n_patches: int
    identifier: str

    def encode_text(self, ids_text: str) -> tuple[torch.Tensor, torch.Tensor]: ...

    def encode_image(self, pixels: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]: ...


@dataclass(frozen=True)
class ExportManifest:
    dim: int
    count: int
    n_patches: int | None
    normalized: bool
    checkpoint: str

    def to_json(self) -> str:
        return json.dumps(asdict(self))


class _ToyAdapter:
    def __init__(self, payload: dict, source: str):
        cfg = ToyConfig(**payload["config"])
        model = ToyDualEncoder(cfg)
        model.load_state_dict(payload["state_dict"])
        model.eval()
        self._model = model
        self.dim = cfg.dim
        self.n_patches = model.n_patches
        self.identifier = f"{ARCH_NAME}:{source}"

    @torch.no_grad()
    def encode_text(self, ids_text: str):
        return self._model.encode_text(ids_text)

    @torch.no_grad()
    def encode_image(self, pixels: torch.Tensor):
        return self._model.encode_image(pixels)


ADAPTERS: dict[str, Callable[[dict, str], EncoderAdapter]] = {ARCH_NAME: _ToyAdapter}


def load_checkpoint(path: str | Path) -> EncoderAdapter:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    arch = payload.get("arch")
    if arch not in ADAPTERS:
        raise ShapeMismatch(f"{path}: unknown architecture {arch!r}; known: {sorted(ADAPTERS)}")
    return ADAPTERS[arch](payload, Path(path).name)


def read_ids_dict(path: str | Path) -> list[tuple[str, str]]:
    """Read a label→IDS TSV; raises MissingIds for entries without an IDS."""
    entries: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            label = parts[0].strip()
            ids_text = parts[1].strip() if len(parts) > 1 else ""
            if not ids_text:
                raise MissingIds(f"{path}:{lineno}: character {label!r} has no IDS entry")
            entries.append((label, ids_text))
    return entries


def export_index(checkpoint: str | Path, ids_dict: str | Path, out: str | Path) -> ExportManifest:
    """Encode every dictionary entry and write a GLIX file."""
    adapter = load_checkpoint(checkpoint)
    entries = read_ids_dict(ids_dict)

    def records():
        for label, ids_text in entries:
            g, local = adapter.encode_text(ids_text)
            if local.shape != (len(ids_text), adapter.dim):
                raise ShapeMismatch(
                    f"candidate {label!r}: local shape {tuple(local.shape)}, "
                    f"expected ({len(ids_text)}, {adapter.dim})"
                )
            yield label, ids_text, g.numpy(), local.numpy()

    count = formats.write_index(out, adapter.dim, records())
    return ExportManifest(adapter.dim, count, None, True, adapter.identifier)


def read_images_jsonl(path: str | Path) -> list[tuple[str, torch.Tensor, str]]:
    """Read query images as JSONL records {"id", "pixels", "truth"?}."""
    images = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            images.append(
                (record["id"], torch.tensor(record["pixels"], dtype=torch.float32), record.get("truth") or "")
            )
    return images


def export_queries(checkpoint: str | Path, images: str | Path, out: str | Path) -> ExportManifest:
    """Encode every image and write a GLQY file."""
    adapter = load_checkpoint(checkpoint)

    def records():
        for qid, pixels, truth in read_images_jsonl(images):
            g, local = adapter.encode_image(pixels)
            if local.shape != (adapter.n_patches, adapter.dim):
                raise ShapeMismatch(
                    f"query {qid!r}: local shape {tuple(local.shape)}, "
                    f"expected ({adapter.n_patches}, {adapter.dim})"
                )
            yield qid, truth, g.numpy(), local.numpy()

    count = formats.write_queries(out, adapter.dim, records())
    return ExportManifest(adapter.dim, count, adapter.n_patches, True, adapter.identifier)
