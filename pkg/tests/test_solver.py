import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from activecc.model import Clustering, SimilarityState, mc_cost
from activecc.solver import SolverParams, assignment_costs, local_search_cc

from oracles import argmin_set, mc_cost_loop


def blocks(sizes, within=1.0, between=-1.0):
    labels = np.repeat(np.arange(len(sizes)), sizes)
    s = np.where(labels[:, None] == labels[None, :], within, between).astype(float)
    np.fill_diagonal(s, 0.0)
    return SimilarityState(s), Clustering(labels)


def random_state(rng, n):
    s = np.triu(rng.uniform(-1, 1, size=(n, n)), 1)
    return SimilarityState(s + s.T)


def one_move_optimal(c: Clustering, s: SimilarityState) -> bool:
    """Exhaustively try every relocation, re-evaluating the full cost."""
    base = mc_cost(c, s)
    for u in range(c.n):
        for target in list(range(c.k)) + [c.k]:
            if target == c.labels[u]:
                continue
            labels = c.labels.copy()
            labels[u] = target
            if mc_cost(Clustering(labels), s) < base - 1e-9:
                return False
    return True


class TestAssignmentCosts:
    def test_zero_similarity(self):
        assert np.all(assignment_costs(SimilarityState.zeros(4), Clustering([0, 0, 1, 2])) == 0)

    def test_triangle_join_cost(self):
        s = np.zeros((3, 3))
        s[0, 1] = s[1, 0] = 1.0
        s[0, 2] = s[2, 0] = s[1, 2] = s[2, 1] = -1.0
        m = assignment_costs(SimilarityState(s), Clustering([0, 0, 1]))
        assert m[2, 0] == 2.0

    def test_own_singleton_is_zero(self):
        rng = np.random.default_rng(0)
        s = random_state(rng, 5)
        c = Clustering([0, 0, 1, 2, 0])
        m = assignment_costs(s, c)
        assert m[2, 1] == 0.0 and m[3, 2] == 0.0

    def test_matches_definition(self):
        rng = np.random.default_rng(1)
        s = random_state(rng, 6)
        c = Clustering([0, 1, 0, 2, 1, 0])
        m = assignment_costs(s, c)
        for u in range(6):
            for k in range(c.k):
                ref = -sum(s.s[u, v] for v in range(6) if v != u and c.labels[v] == k)
                assert m[u, k] == pytest.approx(ref, abs=1e-12)


class TestLocalSearch:
    def test_all_positive_merges(self):
        s = SimilarityState(np.ones((5, 5)) - np.eye(5))
        assert local_search_cc(s) == Clustering.single(5)

    def test_all_negative_stays_apart(self):
        s = SimilarityState(-(np.ones((5, 5)) - np.eye(5)))
        assert local_search_cc(s, Clustering.single(5)) == Clustering.singletons(5)

    def test_two_blocks_match_brute_force(self):
        s, truth = blocks([3, 3])
        found = local_search_cc(s)
        best, _ = argmin_set(6, s.s, mc_cost_loop)
        assert best == {tuple(truth.labels.tolist())}
        assert found == truth

    def test_zero_similarities_keep_singletons(self):
        assert local_search_cc(SimilarityState.zeros(6)) == Clustering.singletons(6)

    def test_merge_escapes_split_cluster(self):
        # two halves of one block, each a single-move optimum on its own
        s = np.full((8, 8), 0.1)
        s[:4, :4] = 1.0
        s[4:, 4:] = 1.0
        np.fill_diagonal(s, 0.0)
        state = SimilarityState(s)
        split = Clustering([0, 0, 0, 0, 1, 1, 1, 1])
        plain = local_search_cc(state, split, SolverParams(merge_clusters=False))
        assert plain == split
        assert local_search_cc(state, split) == Clustering.single(8)

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        s = random_state(rng, 12)
        p = SolverParams(rng_seed=11, restarts=2)
        assert local_search_cc(s, None, p) == local_search_cc(s, None, p)

    def test_does_not_mutate_input(self):
        rng = np.random.default_rng(4)
        s = random_state(rng, 9)
        before = s.s.copy()
        local_search_cc(s, params=SolverParams(restarts=3))
        assert np.array_equal(s.s, before)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            SolverParams(max_sweeps=0)
        with pytest.raises(ValueError):
            SolverParams(restarts=-1)

    @pytest.mark.parametrize("merge", [True, False])
    def test_restarts_never_worse(self, merge):
        rng = np.random.default_rng(5)
        for _ in range(10):
            s = random_state(rng, 10)
            one = local_search_cc(s, params=SolverParams(rng_seed=0, merge_clusters=merge))
            many = local_search_cc(s, params=SolverParams(rng_seed=0, restarts=4, merge_clusters=merge))
            assert mc_cost(many, s) <= mc_cost(one, s) + 1e-12


class TestLocalOptimality:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 9), st.integers(0, 2**32 - 1), st.booleans(), st.booleans())
    def test_single_move_optimal(self, n, seed, merge, warm):
        rng = np.random.default_rng(seed)
        s = random_state(rng, n)
        init = Clustering(rng.integers(0, n, size=n)) if warm else None
        c = local_search_cc(s, init, SolverParams(rng_seed=seed, merge_clusters=merge))
        assert one_move_optimal(c, s)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(3, 10), st.integers(0, 2**32 - 1))
    def test_never_worse_than_start(self, n, seed):
        rng = np.random.default_rng(seed)
        s = random_state(rng, n)
        init = Clustering(rng.integers(0, 3, size=n))
        c = local_search_cc(s, init, SolverParams(rng_seed=seed))
        assert mc_cost(c, s) <= mc_cost(init, s) + 1e-12

    def test_monotone_descent_per_move(self, monkeypatch):
        """Every accepted relocation lowers the objective."""
        import activecc.solver as solver

        rng = np.random.default_rng(7)
        s = random_state(rng, 10)
        costs = []
        real = solver._descend

        def traced(sim, labels, max_sweeps, gen):
            # one sweep at a time so intermediate states are observable
            cur = labels
            for _ in range(max_sweeps):
                nxt = real(sim, cur, 1, gen)
                costs.append(mc_cost(Clustering(nxt), s))
                if np.array_equal(Clustering(nxt).labels, Clustering(cur).labels):
                    break
                cur = nxt
            return cur

        monkeypatch.setattr(solver, "_descend", traced)
        solver.local_search_cc(s, Clustering(rng.integers(0, 4, size=10)))
        assert all(b <= a + 1e-12 for a, b in zip(costs, costs[1:]))
