"""Exception hierarchy shared by all glyphrank modules."""


class GlyphRankError(Exception):
    """Base class for all validation errors raised by this package."""


class EmptyInput(GlyphRankError):
    """IDS text was empty or whitespace-only."""


class TooLong(GlyphRankError):
    """IDS sequence exceeds the configured maximum token count."""


class BadMagic(GlyphRankError):
    """Binary file does not start with the expected magic bytes."""


class VersionMismatch(GlyphRankError):
    """Binary file carries an unsupported format version."""


class CorruptFile(GlyphRankError):
    """Binary file ended early or a record could not be decoded."""


class DimMismatch(GlyphRankError):
    """Embedding dimensions disagree."""


class RowMismatch(GlyphRankError):
    """Local embedding row count disagrees with the IDS token count."""


class ZeroVector(GlyphRankError):
    """Embedding has (near-)zero norm or non-finite entries and cannot be normalized."""


class DuplicateLabel(GlyphRankError):
    """Two candidates share the same label."""


class NoRadical(GlyphRankError):
    """Candidate IDS contains no radical token; its local mask is all-zero."""


class InvalidParams(GlyphRankError):
    """Parameter outside its documented domain."""


class EmptyMask(GlyphRankError):
    """Local similarity requested with an all-zero token mask."""


class InvalidTemperature(GlyphRankError):
    """Softmax temperature must be finite and strictly positive."""


class EpochOutOfRange(GlyphRankError):
    """Curriculum weight requested for an epoch outside [0, total_epochs]."""


class IndexOutOfRange(GlyphRankError):
    """Token index outside the local embedding set."""


class LengthMismatch(GlyphRankError):
    """Two score/probability vectors have different lengths."""


class MissingTruth(GlyphRankError):
    """Evaluation requires a ground-truth label that is absent or unknown."""
