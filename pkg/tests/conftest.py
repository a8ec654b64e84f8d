import numpy as np
import pytest

from glyphrank.ids import parse_ids
from glyphrank.model import CandidateIndex, make_candidate, make_query
from glyphrank.synth import synth_generate


def unit(rng, shape):
    v = rng.standard_normal(shape)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


@pytest.fixture(scope="session")
def small_synth():
    """A small deterministic index + queries shared by read-only tests."""
    return synth_generate(seed=42, n_radicals=12, n_candidates=60, d=16, n_patches=8, noise=0.1, n_queries=40)


def tiny_index(rng, n=5, d=8):
    """Hand-rolled index with simple two-radical candidates."""
    candidates = []
    for j in range(n):
        ids = parse_ids("⿰" + chr(0x4E00 + 2 * j) + chr(0x4E01 + 2 * j))
        candidates.append(
            make_candidate(f"c{j}", ids, unit(rng, d), unit(rng, (3, d)))
        )
    return CandidateIndex(candidates)


def tiny_query(rng, d=8, n_patches=4, truth=None):
    return make_query("q", unit(rng, d), unit(rng, (n_patches, d)), truth)
