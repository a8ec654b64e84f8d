"""A small self-contained dual encoder for exercising the export pipeline.

Text branch: each IDS token (one Unicode character) is embedded via a
hashed-codepoint embedding table, then projected by separate local and global
heads; the global feature is the mean of token features. Image branch: a
pixel grid is cut into a fixed patch grid, each flattened patch is projected
to the hidden size, then through its own local/global heads. All outputs are
ℓ2-normalized into a shared d-dimensional space.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import torch
import torch.nn.functional as F
from torch import nn

from .errors import ShapeMismatch

ARCH_NAME = "toy-dual-encoder"


@dataclass(frozen=True)
class ToyConfig:
    dim: int = 16
    hidden: int = 32
    vocab: int = 4096
    image_size: int = 16  # square input, pixels
    grid: int = 4  # patches per side; n_patches = grid**2


class ToyDualEncoder(nn.Module):
    def __init__(self, cfg: ToyConfig):
        super().__init__()
        if cfg.image_size % cfg.grid != 0:
            raise ShapeMismatch(f"image_size {cfg.image_size} not divisible by grid {cfg.grid}")
        self.cfg = cfg
        patch = (cfg.image_size // cfg.grid) ** 2
        self.token_emb = nn.Embedding(cfg.vocab, cfg.hidden)
        self.text_local = nn.Linear(cfg.hidden, cfg.dim)
        self.text_global = nn.Linear(cfg.hidden, cfg.dim)
        self.patch_proj = nn.Linear(patch, cfg.hidden)
        self.image_local = nn.Linear(cfg.hidden, cfg.dim)
        self.image_global = nn.Linear(cfg.hidden, cfg.dim)

    @property
    def n_patches(self) -> int:
        return self.cfg.grid**2

    def _token_ids(self, ids_text: str) -> torch.Tensor:
        return torch.tensor([ord(ch) % self.cfg.vocab for ch in ids_text], dtype=torch.long)

    def encode_text(self, ids_text: str) -> tuple[torch.Tensor, torch.Tensor]:
        """Return (global (d,), local (len(ids_text), d)), unit rows."""
        feats = self.token_emb(self._token_ids(ids_text))  # (M, hidden)
        local = F.normalize(self.text_local(feats), dim=-1)
        g = F.normalize(self.text_global(feats.mean(dim=0)), dim=-1)
        return g, local

    def encode_image(self, pixels: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Return (global (d,), local (grid², d)) for a (image_size, image_size) grid."""
        size, grid = self.cfg.image_size, self.cfg.grid
        if pixels.shape != (size, size):
            raise ShapeMismatch(f"image shape {tuple(pixels.shape)}, expected ({size}, {size})")
        p = size // grid
        patches = (
            pixels.reshape(grid, p, grid, p).permute(0, 2, 1, 3).reshape(grid * grid, p * p)
        )
        feats = self.patch_proj(patches.float())  # (grid², hidden)
        local = F.normalize(self.image_local(feats), dim=-1)
        g = F.normalize(self.image_global(feats.mean(dim=0)), dim=-1)
        return g, local


def save_toy_checkpoint(path: str | Path, cfg: ToyConfig | None = None, seed: int = 0) -> ToyConfig:
    """Create a randomly-initialized toy checkpoint file."""
    cfg = cfg or ToyConfig()
    torch.manual_seed(seed)
    model = ToyDualEncoder(cfg)
    torch.save({"arch": ARCH_NAME, "config": asdict(cfg), "state_dict": model.state_dict()}, path)
    return cfg
