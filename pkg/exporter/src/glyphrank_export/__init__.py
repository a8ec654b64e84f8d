"""Bridge from dual-encoder checkpoints to glyphrank GLIX/GLQY files."""

from .errors import ExportError, MissingIds, ShapeMismatch
from .export import ExportManifest, export_index, export_queries, load_checkpoint
from .toy import ToyConfig, ToyDualEncoder, save_toy_checkpoint

__all__ = [
    "ExportError",
    "ExportManifest",
    "MissingIds",
    "ShapeMismatch",
    "ToyConfig",
    "ToyDualEncoder",
    "export_index",
    "export_queries",
    "load_checkpoint",
    "save_toy_checkpoint",
]
