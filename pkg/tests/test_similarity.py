import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glyphrank.errors import DimMismatch, EmptyMask, IndexOutOfRange
from glyphrank.similarity import (
    cosine,
    global_scores,
    response_map,
    s_i2t,
    s_t2i,
    write_response_map_csv,
)


def unit(rng, shape):
    v = rng.standard_normal(shape)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def naive_s_i2t(V, T, mask):
    """Independent double-loop oracle."""
    total, count = 0.0, 0
    for i in range(T.shape[0]):
        if not mask[i]:
            continue
        best = max(float(np.dot(V[n], T[i])) for n in range(V.shape[0]))
        total += best
        count += 1
    return total / count


def naive_s_t2i(V, T, mask):
    total = 0.0
    for n in range(V.shape[0]):
        best = max(float(np.dot(V[n], T[i])) for i in range(T.shape[0]) if mask[i])
        total += best
    return total / V.shape[0]


class TestCosine:
    def test_identity(self):
        v = np.array([0.6, 0.8])
        assert cosine(v, v) == 1.0

    def test_orthogonal(self):
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_antipodal(self):
        v = np.array([0.6, 0.8])
        assert cosine(v, -v) == -1.0

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            cosine(np.ones(3), np.ones(4))

    def test_clamped(self):
        # Slightly denormalized inputs cannot push outside [-1, 1].
        v = np.array([1.0 + 1e-7, 0.0])
        assert cosine(v, v) == 1.0


class TestGlobalScores:
    def test_planted_angles(self, small_synth):
        index, queries = small_synth
        q = queries[0]
        scores = global_scores(q, index)
        assert scores.shape == (len(index),)
        for j in (0, len(index) // 2, len(index) - 1):
            expected = cosine(q.global_vec, index[j].global_vec)
            assert scores[j] == pytest.approx(expected, abs=1e-12)

    def test_exact_match_scores_one(self, small_synth):
        index, _ = small_synth
        from glyphrank.model import make_query

        q = make_query("q", index[3].global_vec, index[3].local[:1])
        assert global_scores(q, index)[3] == 1.0

    def test_dim_mismatch(self, small_synth):
        index, _ = small_synth
        from glyphrank.model import make_query

        q = make_query("q", np.ones(index.dim + 1), np.ones((2, index.dim + 1)))
        with pytest.raises(DimMismatch):
            global_scores(q, index)


class TestI2T:
    def test_single_token_matching_patch(self):
        e1, e2 = np.eye(2)
        V = np.stack([e1, e2])
        T = e1.reshape(1, 2)
        assert s_i2t(V, T, [1]) == 1.0

    def test_hand_case(self):
        e1, e2, e3 = np.eye(3)
        V = np.stack([e1, e2])
        T = np.stack([e3, e1, e2])  # operator junk orthogonal to both patches
        assert s_i2t(V, T, [0, 1, 1]) == 1.0
        assert s_i2t(V, T, [1, 1, 1]) == pytest.approx(2 / 3, abs=1e-15)

    def test_empty_mask(self):
        V = np.eye(2)
        with pytest.raises(EmptyMask):
            s_i2t(V, V, [0, 0])

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            s_i2t(np.eye(2), np.eye(3), [1, 1, 1])


class TestT2I:
    def test_all_patches_match_token(self):
        e1 = np.array([1.0, 0.0])
        V = np.stack([e1, e1, e1])
        assert s_t2i(V, e1.reshape(1, 2), [1]) == 1.0

    def test_hand_case(self):
        e1, e2 = np.eye(2)
        V = np.stack([e1, e2])
        assert s_t2i(V, e1.reshape(1, 2), [1]) == pytest.approx(0.5, abs=1e-15)

    def test_empty_mask(self):
        with pytest.raises(EmptyMask):
            s_t2i(np.eye(2), np.eye(2), [0, 0])


class TestBruteForceParity:
    @settings(max_examples=150, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_small_random_instances(self, seed):
        rng = np.random.default_rng(seed)
        n_p = int(rng.integers(1, 9))
        m = int(rng.integers(1, 9))
        d = int(rng.integers(2, 9))
        V = unit(rng, (n_p, d))
        T = unit(rng, (m, d))
        mask = rng.integers(0, 2, size=m)
        if mask.sum() == 0:
            mask[int(rng.integers(m))] = 1
        assert s_i2t(V, T, mask) == pytest.approx(naive_s_i2t(V, T, mask), abs=1e-9)
        assert s_t2i(V, T, mask) == pytest.approx(naive_s_t2i(V, T, mask), abs=1e-9)


class TestProperties:
    def test_range(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            V, T = unit(rng, (5, 6)), unit(rng, (4, 6))
            mask = [1, 0, 1, 1]
            for val in (s_i2t(V, T, mask), s_t2i(V, T, mask)):
                assert -1 - 1e-9 <= val <= 1 + 1e-9

    def test_mask_invariance_exact(self):
        rng = np.random.default_rng(1)
        V, T = unit(rng, (6, 8)), unit(rng, (5, 8))
        mask = [0, 1, 0, 1, 1]
        base_i2t, base_t2i = s_i2t(V, T, mask), s_t2i(V, T, mask)
        for _ in range(20):
            T2 = T.copy()
            for i, m in enumerate(mask):
                if not m:
                    T2[i] = unit(rng, 8)
            assert s_i2t(V, T2, mask) == base_i2t
            assert s_t2i(V, T2, mask) == base_t2i

    def test_patch_extension_monotone(self):
        rng = np.random.default_rng(2)
        V, T = unit(rng, (4, 8)), unit(rng, (3, 8))
        mask = [1, 1, 0]
        base = s_i2t(V, T, mask)
        extended = np.vstack([V, unit(rng, (1, 8))])
        assert s_i2t(extended, T, mask) >= base - 1e-12

    def test_permutation_invariance(self):
        rng = np.random.default_rng(3)
        V, T = unit(rng, (5, 8)), unit(rng, (4, 8))
        mask = np.array([1, 0, 1, 1])
        pi_v = rng.permutation(5)
        pi_t = rng.permutation(4)
        assert s_i2t(V[pi_v], T[pi_t], mask[pi_t]) == pytest.approx(s_i2t(V, T, mask), abs=1e-12)
        assert s_t2i(V[pi_v], T[pi_t], mask[pi_t]) == pytest.approx(s_t2i(V, T, mask), abs=1e-12)


class TestResponseMap:
    def test_matching_token(self):
        V = np.eye(4)
        T = V[:2]
        rmap = response_map(V, T, 0)
        np.testing.assert_allclose(rmap.values, [1, 0, 0, 0], atol=1e-15)

    def test_negated_token(self):
        V = np.eye(3)
        rmap = response_map(V, -V[:1], 0)
        assert rmap.values[0] == -1.0

    def test_elementwise_oracle(self):
        rng = np.random.default_rng(4)
        V, T = unit(rng, (6, 5)), unit(rng, (3, 5))
        rmap = response_map(V, T, 2)
        expected = [float(np.dot(V[n], T[2])) for n in range(6)]
        np.testing.assert_allclose(rmap.values, expected, atol=1e-6)

    def test_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            response_map(np.eye(2), np.eye(2), 2)

    def test_csv_export(self, tmp_path):
        V = np.eye(3)
        rmap = response_map(V, V[:1], 0)
        path = tmp_path / "rm.csv"
        write_response_map_csv(rmap, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["patch_index", "response"]
        assert len(rows) == 4
        assert float(rows[1][1]) == 1.0
