"""Exporter error types."""


class ExportError(Exception):
    """Base class for exporter failures."""


class MissingIds(ExportError):
    """A dictionary character has no IDS entry."""


class ShapeMismatch(ExportError):
    """A tensor produced by the encoder has an unexpected shape."""
