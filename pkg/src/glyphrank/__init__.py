"""glyphrank: retrieval and hierarchical inference for zero-shot ideographic
character recognition over precomputed embeddings."""

from .errors import GlyphRankError
from .estimator import GlyphRankClassifier
from .ids import IdsSequence, IdsToken, TokenKind, build_mask, classify_token, parse_ids, validate_ids
from .inference import InferenceConfig, RankingResult, infer, infer_exhaustive
from .model import Candidate, CandidateIndex, QuerySample, make_candidate, make_query
from .storage import load_index, load_queries, save_index, save_queries
from .synth import synth_generate

__all__ = [
    "GlyphRankError",
    "GlyphRankClassifier",
    "IdsSequence",
    "IdsToken",
    "TokenKind",
    "build_mask",
    "classify_token",
    "parse_ids",
    "validate_ids",
    "InferenceConfig",
    "RankingResult",
    "infer",
    "infer_exhaustive",
    "Candidate",
    "CandidateIndex",
    "QuerySample",
    "make_candidate",
    "make_query",
    "load_index",
    "load_queries",
    "save_index",
    "save_queries",
    "synth_generate",
]

__version__ = "0.1.0"
