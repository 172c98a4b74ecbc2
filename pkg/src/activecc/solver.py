"""Local-search correlation clustering on the max-correlation objective.

Objects are relocated one at a time to whichever existing cluster (or a
fresh singleton) has the lowest assignment cost.  The number of clusters is
therefore discovered by the search rather than fixed in advance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Clustering, SimilarityState, mc_cost


@dataclass(frozen=True)
class SolverParams:
    max_sweeps: int = 200
    restarts: int = 0
    rng_seed: int | None = 0
    # also merge whole clusters when that lowers the cost
    merge_clusters: bool = True

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if self.restarts < 0:
            raise ValueError("restarts must be >= 0")


def assignment_costs(s: SimilarityState, c: Clustering) -> np.ndarray:
    """N x K matrix whose (u, k) entry is the cost of placing ``u`` in cluster ``k``.

    The cost is ``-sum(S_uv for v != u in cluster k)``; the zero diagonal of S
    keeps ``u`` itself out of the sum.
    """
    if c.n != s.n:
        raise ValueError(f"clustering has {c.n} labels but similarity state has {s.n} objects")
    onehot = np.zeros((c.n, c.k))
    onehot[np.arange(c.n), c.labels] = 1.0
    return -s.s @ onehot


# improvements smaller than this are treated as ties
_TOL = 1e-12


def _descend(sim: np.ndarray, labels: np.ndarray, max_sweeps: int, rng: np.random.Generator) -> np.ndarray:
    n = sim.shape[0]
    labels = labels.copy()
    for _ in range(max_sweeps):
        # one spare column so a fresh singleton can always be opened
        width = int(labels.max()) + 2
        onehot = np.zeros((n, width))
        onehot[np.arange(n), labels] = 1.0
        costs = -sim @ onehot
        sizes = np.bincount(labels, minlength=width)
        moved = 0
        for u in rng.permutation(n):
            cur = labels[u]
            row = np.where(sizes > 0, costs[u], np.inf)
            best = int(np.argmin(row))
            target = cur
            if row[best] < row[cur] - _TOL:
                target = best
            # a fresh cluster costs 0 and must beat every occupied option
            if row[best] > _TOL and sizes[cur] > 1:
                empty = np.flatnonzero(sizes == 0)
                if empty.size == 0:
                    costs = np.hstack([costs, np.zeros((n, 1))])
                    sizes = np.append(sizes, 0)
                    empty = np.array([sizes.size - 1])
                target = int(empty[0])
            if target == cur:
                continue
            col = sim[:, u]
            costs[:, cur] += col
            costs[:, target] -= col
            sizes[cur] -= 1
            sizes[target] += 1
            labels[u] = target
            moved += 1
        if moved == 0:
            break
        labels = Clustering(labels).labels.copy()
    return labels


def _best_merge(sim: np.ndarray, labels: np.ndarray) -> tuple[int, int] | None:
    k = int(labels.max()) + 1
    onehot = np.zeros((labels.size, k))
    onehot[np.arange(labels.size), labels] = 1.0
    between = onehot.T @ sim @ onehot
    between[np.tril_indices(k)] = -np.inf
    flat = int(np.argmax(between))
    a, b = divmod(flat, k)
    if between[a, b] > _TOL:
        return a, b
    return None


def _search(sim: np.ndarray, labels: np.ndarray, params: SolverParams, rng: np.random.Generator) -> np.ndarray:
    labels = _descend(sim, labels, params.max_sweeps, rng)
    if not params.merge_clusters:
        return labels
    for _ in range(labels.size):
        pair = _best_merge(sim, labels)
        if pair is None:
            break
        a, b = pair
        labels = np.where(labels == b, a, labels)
        labels = _descend(sim, Clustering(labels).labels, params.max_sweeps, rng)
    return labels


def local_search_cc(
    s: SimilarityState,
    init: Clustering | None = None,
    params: SolverParams | None = None,
) -> Clustering:
    """Minimise the max-correlation cost by single-object relocation.

    Starting from ``init`` (all singletons when omitted), objects are visited
    in a seeded random order each sweep and moved to the cheapest cluster.
    Ties keep the object where it is; otherwise the lowest cluster index
    wins, and a new singleton is opened only when strictly cheaper than all
    occupied clusters.  Sweeps stop once a full pass makes no move or after
    ``params.max_sweeps`` passes.

    When ``params.merge_clusters`` is set, a converged descent is followed
    by merging the two clusters with the largest positive similarity mass
    between them, and the descent resumes; this repeats until no merge
    lowers the cost.  The result is single-move optimal either way.

    With ``params.restarts > 0`` the descent is repeated from that many random
    partitions into ``ceil(sqrt(N))`` groups and the lowest-cost result kept
    (earliest run wins ties).
    """
    params = params or SolverParams()
    n = s.n
    if init is None:
        init = Clustering.singletons(n)
    if init.n != n:
        raise ValueError(f"initial clustering has {init.n} labels, expected {n}")
    rng = np.random.default_rng(params.rng_seed)

    best = Clustering(_search(s.s, init.labels, params, rng))
    best_cost = mc_cost(best, s)
    groups = max(1, math.ceil(math.sqrt(n)))
    for _ in range(params.restarts):
        start = rng.integers(0, groups, size=n)
        cand = Clustering(_search(s.s, Clustering(start).labels, params, rng))
        cost = mc_cost(cand, s)
        if cost < best_cost:
            best, best_cost = cand, cost
    return best
