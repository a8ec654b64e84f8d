import numpy as np
import pytest

from glyphrank.errors import InvalidParams
from glyphrank.inference import InferenceConfig, infer, infer_exhaustive
from glyphrank.model import NORM_TOL
from glyphrank.synth import synth_generate


class TestValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n_radicals=1),
            dict(d=3),
            dict(n_patches=0),
            dict(noise=-0.1),
            dict(n_candidates=0),
            dict(n_queries=0),
        ],
    )
    def test_invalid_params(self, kwargs):
        base = dict(seed=0, n_radicals=4, n_candidates=5, d=8, n_patches=3, noise=0.0)
        base.update(kwargs)
        with pytest.raises(InvalidParams):
            synth_generate(**base)

    def test_too_few_distinct_sets(self):
        # 2 radicals give only 3 non-empty subsets.
        with pytest.raises(InvalidParams):
            synth_generate(seed=0, n_radicals=2, n_candidates=50, d=8, n_patches=2, noise=0.0)


class TestDeterminism:
    def test_same_seed_bit_identical(self):
        a_idx, a_q = synth_generate(seed=9, n_radicals=8, n_candidates=20, d=8, n_patches=4, noise=0.3)
        b_idx, b_q = synth_generate(seed=9, n_radicals=8, n_candidates=20, d=8, n_patches=4, noise=0.3)
        assert a_idx.labels == b_idx.labels
        for ca, cb in zip(a_idx, b_idx):
            assert ca.ids.text == cb.ids.text
            np.testing.assert_array_equal(ca.global_vec, cb.global_vec)
            np.testing.assert_array_equal(ca.local, cb.local)
        for qa, qb in zip(a_q, b_q):
            assert qa.truth == qb.truth
            np.testing.assert_array_equal(qa.local, qb.local)

    def test_different_seed_differs(self):
        a_idx, _ = synth_generate(seed=1, n_radicals=8, n_candidates=20, d=8, n_patches=4, noise=0.0)
        b_idx, _ = synth_generate(seed=2, n_radicals=8, n_candidates=20, d=8, n_patches=4, noise=0.0)
        assert not np.array_equal(a_idx[0].global_vec, b_idx[0].global_vec)


class TestInvariants:
    def test_unit_rows_and_masks(self):
        index, queries = synth_generate(seed=5, n_radicals=10, n_candidates=30, d=12, n_patches=6, noise=0.4)
        for cand in index:
            assert abs(np.linalg.norm(cand.global_vec.astype(np.float64)) - 1) <= NORM_TOL
            norms = np.linalg.norm(cand.local.astype(np.float64), axis=1)
            assert np.all(np.abs(norms - 1) <= NORM_TOL)
            assert cand.ids.radical_count >= 1
            assert cand.local.shape[0] == len(cand.ids)
        for q in queries:
            assert q.local.shape[0] == 6
            assert q.truth in index

    def test_distinct_radical_sets(self):
        index, _ = synth_generate(seed=5, n_radicals=10, n_candidates=60, d=8, n_patches=2, noise=0.0)
        sets = [frozenset(t.char for t in c.ids.tokens if t.is_radical) for c in index]
        assert len(set(sets)) == len(sets)


class TestNoiseFreeRecovery:
    def test_top1_accuracy_one_exhaustive(self):
        index, queries = synth_generate(
            seed=13, n_radicals=20, n_candidates=200, d=16, n_patches=8, noise=0.0, n_queries=200
        )
        cfg = InferenceConfig(k=50)
        assert all(infer_exhaustive(q, index, cfg).top1 == q.truth for q in queries)

    def test_top1_at_any_k(self):
        index, queries = synth_generate(
            seed=13, n_radicals=12, n_candidates=40, d=16, n_patches=6, noise=0.0, n_queries=40
        )
        for k in (1, 3, 40):
            cfg = InferenceConfig(k=k)
            assert all(infer(q, index, cfg).top1 == q.truth for q in queries)
