"""Coverage-aware batch selection for active correlation clustering.

The current clustering splits the pair set into query regions: all pairs
inside cluster ``a`` form region ``(a, a)`` and all pairs between clusters
``a < b`` form region ``(a, b)``.  Each region gets a share of the batch
proportional to its informativeness mass divided by its size, and pairs
are then drawn inside each region by Gumbel top-k sampling on the
mean-field entropy.

The baselines (pure entropy, uniform, and uniform-then-entropy) sit behind
the same :func:`select_batch` entry point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .meanfield import PROB_CLAMP, entropy_matrix
from .model import Clustering, SimilarityState, violation_matrix

A_KINDS = ("entropy", "cost", "freq", "mu")
MEMBERSHIP_MODES = ("hard", "soft")
BASELINES = ("entropy", "uniform", "unient")
STRATEGY_IDS = tuple(
    f"coverage-{a}-{mode}" for mode in MEMBERSHIP_MODES for a in A_KINDS
) + BASELINES

# switch point used when a config does not give one
DEFAULT_SWITCH_ITER = 20


class Region(NamedTuple):
    a: int
    b: int


def regions_for(k: int) -> list[Region]:
    """All regions for ``k`` clusters in lexicographic order."""
    return [Region(a, b) for a in range(k) for b in range(a, k)]


def region_index(a: np.ndarray, b: np.ndarray, k: int) -> np.ndarray:
    """Position of region ``(min(a, b), max(a, b))`` in :func:`regions_for` order."""
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    return lo * k - lo * (lo - 1) // 2 + (hi - lo)


@dataclass(frozen=True)
class MembershipMatrix:
    u: np.ndarray
    mode: str

    def __post_init__(self):
        if self.mode not in MEMBERSHIP_MODES:
            raise ValueError(f"unknown membership mode {self.mode!r}")
        u = np.asarray(self.u, dtype=np.float64)
        if u.ndim != 2:
            raise ValueError("membership matrix must be two-dimensional")
        if np.any(u < 0):
            raise ValueError("memberships must be non-negative")
        if not np.allclose(u.sum(axis=1), 1.0, rtol=0, atol=1e-9):
            raise ValueError("membership rows must sum to 1")
        if self.mode == "hard" and not np.all((u == 0) | (u == 1)):
            raise ValueError("hard memberships must be one-hot")
        object.__setattr__(self, "u", u)

    @property
    def k(self) -> int:
        return self.u.shape[1]

    def labels(self) -> np.ndarray:
        """Per-object region label (argmax column, lowest index on ties)."""
        return np.argmax(self.u, axis=1)


def membership_hard(c: Clustering) -> MembershipMatrix:
    u = np.zeros((c.n, c.k))
    u[np.arange(c.n), c.labels] = 1.0
    return MembershipMatrix(u, "hard")


def membership_soft(q: np.ndarray) -> MembershipMatrix:
    return MembershipMatrix(q, "soft")


def _upper_values(mat: np.ndarray) -> np.ndarray:
    """Upper triangle of a K x K matrix (diagonal included) in region order."""
    return mat[np.triu_indices(mat.shape[0])]


def _size_values(u: np.ndarray) -> np.ndarray:
    s = u.sum(axis=0)
    gram = u.T @ u
    sizes = np.outer(s, s) - gram
    sizes[np.diag_indices_from(sizes)] *= 0.5
    return np.maximum(_upper_values(sizes), 0.0)


def _mass_values(u: np.ndarray, a: np.ndarray) -> np.ndarray:
    g = u.T @ a @ u
    # off-diagonal G is symmetric up to rounding; use the exact average
    g = 0.5 * (g + g.T)
    g[np.diag_indices_from(g)] *= 0.5
    return np.maximum(_upper_values(g), 0.0)


def region_sizes(u: MembershipMatrix) -> dict[Region, float]:
    """Soft number of pairs attributable to each region.

    With ``s = U^T 1`` and ``B = U^T U``: ``N_aa = (s_a^2 - B_aa) / 2`` and
    ``N_ab = s_a s_b - B_ab``.  For one-hot ``U`` these are the plain
    within- and between-cluster pair counts.
    """
    return dict(zip(regions_for(u.k), _size_values(u.u).tolist()))


def _check_informativeness(a: np.ndarray, n: int) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (n, n):
        raise ValueError(f"informativeness matrix has shape {a.shape}, expected {(n, n)}")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12):
        raise ValueError("informativeness matrix must be symmetric")
    if np.any(a < 0):
        raise ValueError("informativeness matrix must be non-negative")
    return a


def informativeness_mass(u: MembershipMatrix, a: np.ndarray) -> dict[Region, float]:
    """Per-region informativeness mass from ``G = U^T A U``."""
    a = _check_informativeness(a, u.u.shape[0])
    return dict(zip(regions_for(u.k), _mass_values(u.u, a).tolist()))


def _proportion_values(sizes, masses, epsilon, caps=None) -> np.ndarray:
    sizes = np.asarray(sizes, dtype=np.float64)
    masses = np.asarray(masses, dtype=np.float64)
    scores = masses / np.maximum(sizes, epsilon)
    total = scores.sum()
    if total > 0:
        return scores / total
    # degenerate round: spread evenly over regions that can still take queries
    live = np.ones(scores.size) if caps is None else (np.asarray(caps) > 0).astype(np.float64)
    if live.sum() == 0:
        live = np.ones(scores.size)
    return live / live.sum()


def region_proportions(
    sizes: Mapping[Region, float],
    masses: Mapping[Region, float],
    epsilon: float = 1e-9,
    caps: Mapping[Region, int] | None = None,
) -> dict[Region, float]:
    """Size-normalised share of the batch for each region.

    ``V_r = M_r / max(N_r, epsilon)`` and ``pi_r = V_r / sum(V)``.  When every
    score is zero the result is uniform over regions with positive capacity
    (over all regions if ``caps`` is not given).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if set(sizes) != set(masses):
        raise ValueError("sizes and masses must cover the same regions")
    keys = sorted(sizes)
    cap_values = None if caps is None else [caps.get(r, 0) for r in keys]
    pi = _proportion_values([sizes[r] for r in keys], [masses[r] for r in keys], epsilon, cap_values)
    return dict(zip(keys, pi.tolist()))


def build_A(
    a_kind: str,
    s: SimilarityState,
    q: np.ndarray | None,
    c: Clustering,
) -> np.ndarray:
    """Per-pair informativeness matrix for one of the four region scores.

    ``entropy``: same-cluster entropy under ``q``.  ``cost``: |S_uv| on pairs
    violating ``c``.  ``freq``: 1 for unqueried pairs.  ``mu``: 1 - |S_uv|.
    """
    if a_kind == "entropy":
        if q is None:
            raise ValueError("the entropy score needs a mean-field posterior")
        return entropy_matrix(q)
    if a_kind == "cost":
        return np.abs(s.s) * violation_matrix(c, s)
    if a_kind == "freq":
        a = 1.0 - s.f.astype(np.float64)
    elif a_kind == "mu":
        a = 1.0 - np.abs(s.s)
    else:
        raise ValueError(f"unknown informativeness kind {a_kind!r}")
    np.fill_diagonal(a, 0.0)
    return a


def _largest_remainder(weights: np.ndarray, total: int, rng: np.random.Generator | None = None) -> np.ndarray:
    if total <= 0:
        return np.zeros(weights.size, dtype=np.int64)
    quotas = weights / weights.sum() * total
    # shave float noise so 2.9999999999 does not floor to 2
    quotas = np.round(quotas, 9)
    alloc = np.floor(quotas).astype(np.int64)
    left = total - int(alloc.sum())
    if left > 0:
        rem = quotas - alloc
        tiebreak = np.arange(rem.size) if rng is None else rng.permutation(rem.size)
        order = np.lexsort((tiebreak, -rem))
        alloc[order[:left]] += 1
    return alloc


def _allocate(pi: np.ndarray, batch: int, caps: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
    pi = np.asarray(pi, dtype=np.float64)
    caps = np.asarray(caps, dtype=np.int64)
    total = min(int(batch), int(caps.sum()))
    alloc = np.zeros(pi.size, dtype=np.int64)
    saturated = np.zeros(pi.size, dtype=bool)
    while total > 0:
        budget = total - int(caps[saturated].sum())
        open_ = ~saturated
        weights = np.where(open_, pi, 0.0)
        if weights.sum() <= 0:
            weights = (open_ & (caps > 0)).astype(np.float64)
        alloc = np.where(saturated, caps, 0)
        alloc[open_] = _largest_remainder(weights, budget, rng)[open_]
        over = open_ & (alloc > caps)
        if not over.any():
            break
        saturated |= over
    return alloc


def allocate_budget(
    pi: Mapping[Region, float],
    batch: int,
    caps: Mapping[Region, int],
    rng: np.random.Generator | None = None,
) -> dict[Region, int]:
    """Integer per-region allocation summing to ``min(batch, sum(caps))``.

    Quotas ``pi_r * batch`` are floored and leftover units handed out by
    descending fractional remainder.  Equal remainders go in lexicographic
    region order, or in a random order drawn from ``rng`` when one is given.
    Regions whose allocation exceeds their capacity are pinned at capacity
    and the remaining budget is apportioned afresh over the other regions.
    """
    if batch < 0:
        raise ValueError("batch must be non-negative")
    keys = sorted(pi)
    cap_values = np.array([caps.get(r, 0) for r in keys], dtype=np.int64)
    if np.any(cap_values < 0):
        raise ValueError("capacities must be non-negative")
    alloc = _allocate(np.array([pi[r] for r in keys]), batch, cap_values, rng)
    return dict(zip(keys, alloc.tolist()))


def _gumbel_top(scores: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    keys = np.log(np.maximum(scores, PROB_CLAMP)) + rng.gumbel(size=scores.size)
    # stable lexsort: equal keys resolve by candidate order
    return np.lexsort((np.arange(scores.size), -keys))[:k]


def sample_within_region(
    pairs: Sequence[tuple[int, int]],
    scores: Sequence[float],
    b_r: int,
    rng: np.random.Generator,
) -> list[tuple[int, int]]:
    """Draw ``b_r`` pairs without replacement with probability proportional to score.

    Implemented as the Gumbel top-k trick on ``log(score) + Gumbel(0, 1)``.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if len(pairs) != scores.size:
        raise ValueError("pairs and scores differ in length")
    if b_r > len(pairs):
        raise ValueError(f"cannot draw {b_r} pairs from a region of {len(pairs)}")
    if b_r <= 0:
        return []
    return [tuple(pairs[i]) for i in _gumbel_top(scores, b_r, rng)]


@dataclass
class RegionPlan:
    regions: list[Region]
    sizes: np.ndarray
    masses: np.ndarray
    scores: np.ndarray
    proportions: np.ndarray
    allocations: np.ndarray
    caps: np.ndarray

    def as_rows(self) -> list[dict]:
        return [
            {
                "region": tuple(r),
                "size": float(self.sizes[i]),
                "mass": float(self.masses[i]),
                "score": float(self.scores[i]),
                "pi": float(self.proportions[i]),
                "alloc": int(self.allocations[i]),
                "cap": int(self.caps[i]),
            }
            for i, r in enumerate(self.regions)
        ]


def plan_regions(
    u: MembershipMatrix,
    a: np.ndarray,
    caps: np.ndarray,
    batch: int,
    epsilon: float = 1e-9,
    rng: np.random.Generator | None = None,
) -> RegionPlan:
    """Sizes, masses, proportions and allocation for every region of ``u``."""
    a = _check_informativeness(a, u.u.shape[0])
    sizes = _size_values(u.u)
    masses = _mass_values(u.u, a)
    scores = masses / np.maximum(sizes, epsilon)
    pi = _proportion_values(sizes, masses, epsilon, caps)
    alloc = _allocate(pi, batch, caps, rng)
    return RegionPlan(regions_for(u.k), sizes, masses, scores, pi, alloc, np.asarray(caps))


@dataclass(frozen=True)
class StrategyConfig:
    kind: str = "coverage"
    a_kind: str = "cost"
    membership_mode: str = "hard"
    switch_iter: float = DEFAULT_SWITCH_ITER
    epsilon: float = 1e-9
    rng_seed: int | None = None
    # order of equal largest remainders: "random" (seeded) or "lexicographic"
    tie_break: str = "random"

    def __post_init__(self):
        if self.kind not in ("coverage",) + BASELINES:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.a_kind not in A_KINDS:
            raise ValueError(f"unknown informativeness kind {self.a_kind!r}")
        if self.membership_mode not in MEMBERSHIP_MODES:
            raise ValueError(f"unknown membership mode {self.membership_mode!r}")
        if self.switch_iter < 0:
            raise ValueError("switch_iter must be >= 0")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.tie_break not in ("random", "lexicographic"):
            raise ValueError(f"unknown tie_break {self.tie_break!r}")

    @classmethod
    def from_name(cls, name: str, **kwargs) -> "StrategyConfig":
        """Build a config from an identifier such as ``coverage-cost-hard``."""
        if name not in STRATEGY_IDS:
            raise ValueError(f"unknown strategy {name!r}; expected one of {', '.join(STRATEGY_IDS)}")
        if name.startswith("coverage-"):
            _, a_kind, mode = name.split("-")
            return cls(kind="coverage", a_kind=a_kind, membership_mode=mode, **kwargs)
        return cls(kind=name, **kwargs)

    @property
    def name(self) -> str:
        if self.kind == "coverage":
            return f"coverage-{self.a_kind}-{self.membership_mode}"
        return self.kind

    def needs_posterior(self, iteration: int) -> bool:
        """Whether round ``iteration`` consumes the mean-field posterior."""
        if self.kind == "uniform":
            return False
        if self.kind == "unient":
            return iteration >= self.switch_iter
        return True


def _as_pairs(rows: np.ndarray, cols: np.ndarray) -> list[tuple[int, int]]:
    return list(zip(rows.tolist(), cols.tolist()))


def _entropy_pick(rows, cols, q, batch, rng) -> list[tuple[int, int]]:
    h = entropy_matrix(q)[rows, cols]
    idx = _gumbel_top(h, batch, rng)
    return _as_pairs(rows[idx], cols[idx])


def _coverage_pick(strategy, rows, cols, s, c, q, batch, rng) -> list[tuple[int, int]]:
    if strategy.membership_mode == "hard":
        u = membership_hard(c)
    else:
        if q is None:
            raise ValueError("soft memberships need a mean-field posterior")
        u = membership_soft(q)
    obj_region = u.labels()
    h = entropy_matrix(q) if q is not None else None
    a = h if strategy.a_kind == "entropy" else build_A(strategy.a_kind, s, q, c)

    pair_region = region_index(obj_region[rows], obj_region[cols], u.k)
    n_regions = u.k * (u.k + 1) // 2
    caps = np.bincount(pair_region, minlength=n_regions)
    plan = plan_regions(u, a, caps, batch, strategy.epsilon,
                        rng=rng if strategy.tie_break == "random" else None)

    if h is None:
        scores = np.ones(rows.size)
    else:
        scores = h[rows, cols]
    order = np.argsort(pair_region, kind="stable")
    bounds = np.concatenate([[0], np.cumsum(caps)])
    picked = []
    for r in np.flatnonzero(plan.allocations):
        members = order[bounds[r]:bounds[r + 1]]
        idx = members[_gumbel_top(scores[members], int(plan.allocations[r]), rng)]
        picked.extend(_as_pairs(rows[idx], cols[idx]))
    return picked


def select_batch(
    strategy: StrategyConfig,
    iteration: int,
    s: SimilarityState,
    c: Clustering,
    q: np.ndarray | None,
    batch: int,
    rng: np.random.Generator,
) -> list[tuple[int, int]]:
    """Pick up to ``batch`` distinct unqueried pairs ``(u, v)`` with ``u < v``.

    Coverage strategies run the region pipeline until ``switch_iter`` and then
    fall back to entropy; ``unient`` samples uniformly until ``switch_iter``.
    Entropy-driven selection always uses Gumbel top-k sampling.
    """
    if batch < 1:
        raise ValueError("batch must be >= 1")
    rows, cols = s.unqueried_pairs()
    if rows.size == 0:
        return []
    if batch >= rows.size:
        return _as_pairs(rows, cols)

    kind = strategy.kind
    if kind == "unient":
        kind = "uniform" if iteration < strategy.switch_iter else "entropy"
    elif kind == "coverage" and iteration >= strategy.switch_iter:
        kind = "entropy"

    if kind == "uniform":
        idx = np.sort(rng.choice(rows.size, size=batch, replace=False))
        return _as_pairs(rows[idx], cols[idx])
    if kind == "entropy":
        if q is None:
            raise ValueError("entropy selection needs a mean-field posterior")
        return _entropy_pick(rows, cols, q, batch, rng)
    return _coverage_pick(strategy, rows, cols, s, c, q, batch, rng)


def entropy_k(c: Clustering) -> int:
    """Mean-field width for a round: two slack columns beyond the clustering."""
    return max(c.k + 2, 2)


def parse_strategy_list(text: str) -> list[str]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    for name in names:
        if name not in STRATEGY_IDS:
            raise ValueError(f"unknown strategy {name!r}")
    return names

