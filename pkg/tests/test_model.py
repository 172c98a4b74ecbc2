import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from activecc.model import (
    Clustering,
    SimilarityState,
    canonical_labels,
    cc_cost,
    mc_cost,
    violates,
    violation_matrix,
)

from oracles import argmin_set, cc_cost_loop, mc_cost_loop


def sym(n, entries):
    """Build a symmetric matrix from {(u, v): value} with 0-based ids."""
    s = np.zeros((n, n))
    for (u, v), x in entries.items():
        s[u, v] = s[v, u] = x
    return s


def random_state(rng, n):
    s = rng.uniform(-1, 1, size=(n, n))
    s = np.triu(s, 1)
    return SimilarityState(s + s.T)


# S_12 = +1, S_13 = -1, S_23 = -1 and c = {1,2},{3}
TRIANGLE = SimilarityState(sym(3, {(0, 1): 1.0, (0, 2): -1.0, (1, 2): -1.0}))
TRIANGLE_C = Clustering([0, 0, 1])


class TestClustering:
    def test_canonical_first_occurrence(self):
        assert canonical_labels([5, 5, 2, 9, 2]).tolist() == [0, 0, 1, 2, 1]

    def test_equality_up_to_relabeling(self):
        assert Clustering([1, 1, 0]) == Clustering([0, 0, 7])
        assert Clustering([1, 1, 0]) != Clustering([0, 1, 1])

    def test_k_and_sizes(self):
        c = Clustering([3, 3, 1, 1, 1, 8])
        assert c.k == 3
        assert c.sizes().tolist() == [2, 3, 1]

    def test_labels_read_only(self):
        c = Clustering([0, 1])
        with pytest.raises(ValueError):
            c.labels[0] = 1


class TestSimilarityState:
    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            SimilarityState(np.array([[0.0, 0.5], [0.4, 0.0]]))

    def test_rejects_out_of_range_and_diagonal(self):
        with pytest.raises(ValueError):
            SimilarityState(np.array([[0.0, 1.5], [1.5, 0.0]]))
        with pytest.raises(ValueError):
            SimilarityState(np.array([[0.1, 0.0], [0.0, 0.0]]))

    def test_record_is_query_once(self):
        s = SimilarityState.zeros(3)
        s.record(0, 2, -0.3)
        assert s.s[2, 0] == -0.3 and s.f[0, 2] and s.f[2, 0]
        with pytest.raises(ValueError):
            s.record(2, 0, 1.0)
        assert s.s[0, 2] == -0.3

    def test_unqueried_pairs(self):
        s = SimilarityState.zeros(3)
        s.record(0, 1, 1.0)
        rows, cols = s.unqueried_pairs()
        assert list(zip(rows.tolist(), cols.tolist())) == [(0, 2), (1, 2)]
        assert s.n_queried() == 1


class TestViolates:
    def test_negative_within(self):
        s = SimilarityState(sym(2, {(0, 1): -0.5}))
        assert violates(0, 1, Clustering([0, 0]), s)

    def test_zero_between_violates(self):
        s = SimilarityState.zeros(2)
        assert violates(0, 1, Clustering([0, 1]), s)

    def test_agreeing_pair(self):
        s = SimilarityState(sym(2, {(0, 1): 1.0}))
        assert not violates(0, 1, Clustering([0, 0]), s)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            violates(0, 5, Clustering([0, 0]), SimilarityState.zeros(2))

    def test_matrix_matches_predicate(self):
        rng = np.random.default_rng(0)
        s = random_state(rng, 7)
        c = Clustering(rng.integers(0, 3, size=7))
        m = violation_matrix(c, s)
        for u in range(7):
            for v in range(7):
                if u != v:
                    assert m[u, v] == violates(u, v, c, s)


class TestCosts:
    def test_single_cluster_all_negative(self):
        s = SimilarityState(-(np.ones((3, 3)) - np.eye(3)))
        assert cc_cost(Clustering.single(3), s) == 3.0

    def test_consistent_clustering_has_zero_cc(self):
        s = SimilarityState(sym(4, {(0, 1): 0.7, (2, 3): 0.0, (0, 2): -0.2, (0, 3): -1, (1, 2): -0.5, (1, 3): -0.1}))
        assert cc_cost(Clustering([0, 0, 1, 1]), s) == 0.0

    def test_triangle(self):
        assert cc_cost(TRIANGLE_C, TRIANGLE) == 0.0
        assert mc_cost(TRIANGLE_C, TRIANGLE) == -1.0

    def test_mc_singletons_and_zero(self):
        rng = np.random.default_rng(1)
        assert mc_cost(Clustering.singletons(5), random_state(rng, 5)) == 0.0
        assert mc_cost(Clustering.single(4), SimilarityState.zeros(4)) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            cc_cost(Clustering([0, 1]), SimilarityState.zeros(3))
        with pytest.raises(ValueError):
            mc_cost(Clustering([0, 1]), SimilarityState.zeros(3))

    def test_matches_loop_reference(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            n = int(rng.integers(2, 9))
            s = random_state(rng, n)
            c = Clustering(rng.integers(0, n, size=n))
            assert cc_cost(c, s) == pytest.approx(cc_cost_loop(c.labels, s.s), abs=1e-12)
            assert mc_cost(c, s) == pytest.approx(mc_cost_loop(c.labels, s.s), abs=1e-12)


@st.composite
def instances(draw):
    n = draw(st.integers(2, 10))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    s = random_state(rng, n)
    # sprinkle exact zeros to exercise the tie rule
    if draw(st.booleans()):
        s.s[0, 1] = s.s[1, 0] = 0.0
    labels = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    return s, Clustering(labels)


class TestObjectiveProperties:
    @settings(max_examples=150, deadline=None)
    @given(instances())
    def test_constant_offset(self, inst):
        s, c = inst
        upper = s.s[np.triu_indices(s.n, 1)]
        offset = upper[upper >= 0].sum()
        assert cc_cost(c, s) - mc_cost(c, s) == pytest.approx(offset, abs=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(instances(), st.permutations(range(10)))
    def test_relabel_invariance(self, inst, perm):
        s, c = inst
        relabeled = Clustering(np.array(perm)[c.labels])
        assert cc_cost(relabeled, s) == cc_cost(c, s)
        assert mc_cost(relabeled, s) == mc_cost(c, s)

    @pytest.mark.parametrize("seed", range(8))
    def test_argmin_equivalence(self, seed):
        rng = np.random.default_rng(seed)
        n = 3 + seed % 4
        s = random_state(rng, n).s
        cc_set, _ = argmin_set(n, s, cc_cost_loop)
        mc_set, _ = argmin_set(n, s, mc_cost_loop)
        assert cc_set == mc_set
