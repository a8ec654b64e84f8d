"""Ideographic description sequence (IDS) parsing and the structure filtering mask.

An IDS is a flat Unicode string mixing radical tokens (concrete character
components) with structural operators (the Ideographic Description Characters,
U+2FF0..U+2FFB) that describe spatial arrangement. The engine treats the
sequence linearly: every scalar becomes one token, and the structure filtering
mask marks radicals with 1 and operators with 0 so that local similarity
aggregation only sees visually grounded tokens.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyInput, TooLong

logger = logging.getLogger(__name__)

#: The 12 Ideographic Description Characters of the base Unicode block.
BASE_OPERATORS = frozenset(chr(cp) for cp in range(0x2FF0, 0x2FFC))

#: U+2FFC..U+2FFF, optionally enabled for dictionaries that use them.
EXTENDED_OPERATORS = frozenset(chr(cp) for cp in range(0x2FFC, 0x3000))

#: Operators taking three operands; every other operator takes two.
TERNARY_OPERATORS = frozenset({"⿲", "⿳"})

DEFAULT_MAX_TOKENS = 32


class TokenKind(Enum):
    RADICAL = "radical"
    OPERATOR = "operator"


@dataclass(frozen=True)
class IdsToken:
    """One IDS symbol: a radical (arity 0) or a structural operator (arity 2 or 3)."""

    char: str
    kind: TokenKind
    arity: int

    @property
    def codepoint(self) -> int:
        return ord(self.char)

    @property
    def is_radical(self) -> bool:
        return self.kind is TokenKind.RADICAL


@dataclass(frozen=True)
class IdsSequence:
    """A parsed IDS: ordered tokens plus the derived structure filtering mask."""

    tokens: tuple[IdsToken, ...]
    mask: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def text(self) -> str:
        """Re-serialize the token codepoints; inverse of :func:`parse_ids`."""
        return "".join(t.char for t in self.tokens)

    @property
    def radical_count(self) -> int:
        return sum(self.mask)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the operator-arity well-formedness check."""

    ok: bool
    position: int | None = None
    reason: str | None = None


def classify_token(char: str, operator_set: frozenset[str] = BASE_OPERATORS) -> IdsToken:
    """Classify a single Unicode scalar as a radical or structural operator.

    Total function: anything outside ``operator_set`` is a radical.
    """
    if len(char) != 1:
        raise ValueError(f"expected a single Unicode scalar, got {char!r}")
    if char in operator_set:
        arity = 3 if char in TERNARY_OPERATORS else 2
        return IdsToken(char, TokenKind.OPERATOR, arity)
    return IdsToken(char, TokenKind.RADICAL, 0)


def build_mask(tokens: Sequence[IdsToken] | IdsSequence) -> list[int]:
    """Structure filtering mask: 1 for radicals, 0 for operators."""
    if isinstance(tokens, IdsSequence):
        tokens = tokens.tokens
    return [1 if t.is_radical else 0 for t in tokens]


def parse_ids(
    text: str,
    operator_set: frozenset[str] = BASE_OPERATORS,
    max_tokens: int = DEFAULT_MAX_TOKENS,
) -> IdsSequence:
    """Parse an IDS string into a flat token sequence with its mask.

    The sequence is kept even when operator arities do not balance; use
    :func:`validate_ids` to check well-formedness separately.

    Raises:
        EmptyInput: text is empty or whitespace-only.
        TooLong: more than ``max_tokens`` scalars.
    """
    stripped = text.strip()
    if not stripped:
        raise EmptyInput("IDS text is empty")
    if len(stripped) > max_tokens:
        raise TooLong(f"IDS has {len(stripped)} tokens, limit is {max_tokens}")
    tokens = tuple(classify_token(c, operator_set) for c in stripped)
    return IdsSequence(tokens=tokens, mask=tuple(build_mask(tokens)))


def validate_tokens(tokens: Sequence[IdsToken]) -> ValidationReport:
    """Check that a token list is a well-formed prefix expression.

    Walk left to right with a needed-operand counter starting at 1: each
    operator adds (arity - 1), each radical subtracts 1. The sequence is valid
    iff the counter never hits 0 before the end and ends at exactly 0.
    """
    need = 1
    for pos, tok in enumerate(tokens):
        if need == 0:
            return ValidationReport(False, pos, "extra token after expression completed")
        need += (tok.arity - 1) if not tok.is_radical else -1
    if need != 0:
        return ValidationReport(False, len(tokens), f"missing {need} operand(s) at end")
    return ValidationReport(True)


def validate_ids(seq: IdsSequence) -> ValidationReport:
    """Well-formedness report for a parsed sequence (never raises)."""
    return validate_tokens(seq.tokens)


def random_ids_text(
    rng: np.random.Generator,
    radicals: Sequence[str],
    max_tokens: int = 11,
    operators: Sequence[str] = tuple(sorted(BASE_OPERATORS)),
    leaf_prob: float = 0.4,
) -> str:
    """Generate a random well-formed IDS string over the given radical pool.

    Builds a random prefix tree within ``max_tokens`` tokens and flattens it.
    Used by the synthetic data generator and by property tests.
    """

    def gen(budget: int) -> list[str]:
        if budget < 3 or rng.random() < leaf_prob:
            return [radicals[rng.integers(len(radicals))]]
        op = operators[rng.integers(len(operators))]
        arity = 3 if op in TERNARY_OPERATORS else 2
        if budget < 1 + arity:
            return [radicals[rng.integers(len(radicals))]]
        parts = [op]
        remaining = budget - 1
        for child in range(arity):
            reserve = arity - child - 1
            sub = gen(remaining - reserve)
            parts.extend(sub)
            remaining -= len(sub)
        return parts

    return "".join(gen(max_tokens))


def load_ids_dictionary(path: str | Path, operator_set: frozenset[str] = BASE_OPERATORS) -> dict[str, str]:
    """Load a tab-separated IDS dictionary: ``<character>\\t<IDS>`` per line.

    Lines starting with ``#`` are comments. Duplicate characters keep the last
    entry and log a warning.
    """
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: expected '<char>\\t<IDS>'")
            char, ids_text = parts[0], parts[1]
            if char in entries:
                logger.warning("%s:%d: duplicate entry for %r, keeping the last one", path, lineno, char)
            entries[char] = ids_text
    return entries


def radical_counts(seqs: Iterable[IdsSequence]) -> dict[str, int]:
    """Histogram of radical characters over a collection of sequences."""
    counts: dict[str, int] = {}
    for seq in seqs:
        for tok in seq.tokens:
            if tok.is_radical:
                counts[tok.char] = counts.get(tok.char, 0) + 1
    return counts
