"""Signed similarity graphs, clusterings and the two correlation-clustering objectives.

The similarity estimate ``S`` is stored densely together with a boolean
query mask ``F``.  Pairs are always iterated in upper-triangle order
(``u < v``), which is also the canonical pair form used everywhere else in
the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def canonical_labels(labels) -> np.ndarray:
    """Relabel so that cluster ids appear in first-occurrence order 0, 1, 2, ..."""
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValueError(f"labels must be one-dimensional, got shape {labels.shape}")
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    # rank of each unique value by the position where it first appears
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return rank[inverse.reshape(-1)].astype(np.int64)


@dataclass(frozen=True, eq=False)
class Clustering:
    """A partition of ``n`` objects, stored as canonical label vector."""

    labels: np.ndarray

    def __post_init__(self):
        canon = canonical_labels(self.labels)
        canon.setflags(write=False)
        object.__setattr__(self, "labels", canon)

    @classmethod
    def singletons(cls, n: int) -> "Clustering":
        return cls(np.arange(n))

    @classmethod
    def single(cls, n: int) -> "Clustering":
        return cls(np.zeros(n, dtype=np.int64))

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def __eq__(self, other):
        if not isinstance(other, Clustering):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash(self.labels.tobytes())

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"Clustering(k={self.k}, labels={self.labels.tolist()})"


@dataclass
class SimilarityState:
    """Current similarity estimate ``s`` and the mask ``f`` of queried pairs.

    ``s`` is symmetric with zero diagonal and entries in [-1, 1].  Once a pair
    is marked queried its similarity can no longer be changed; :meth:`record`
    is the only sanctioned way to write an answer.
    """

    s: np.ndarray
    f: np.ndarray = field(default=None)

    def __post_init__(self):
        s = np.array(self.s, dtype=np.float64)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValueError(f"similarity matrix must be square, got shape {s.shape}")
        if s.shape[0] < 1:
            raise ValueError("similarity matrix must have at least one object")
        if not np.all(np.isfinite(s)):
            raise ValueError("similarity matrix contains non-finite entries")
        if not np.array_equal(s, s.T):
            raise ValueError("similarity matrix must be symmetric")
        if np.any(np.diag(s) != 0):
            raise ValueError("similarity matrix must have a zero diagonal")
        if np.any(np.abs(s) > 1):
            raise ValueError("similarities must lie in [-1, 1]")
        if self.f is None:
            f = np.zeros(s.shape, dtype=bool)
        else:
            f = np.array(self.f, dtype=bool)
            if f.shape != s.shape:
                raise ValueError("query mask shape does not match similarity matrix")
            if not np.array_equal(f, f.T) or np.any(np.diag(f)):
                raise ValueError("query mask must be symmetric with a false diagonal")
        self.s = s
        self.f = f

    @classmethod
    def zeros(cls, n: int) -> "SimilarityState":
        return cls(np.zeros((n, n)))

    @property
    def n(self) -> int:
        return self.s.shape[0]

    @property
    def n_pairs(self) -> int:
        return self.n * (self.n - 1) // 2

    def copy(self) -> "SimilarityState":
        return SimilarityState(self.s.copy(), self.f.copy())

    def record(self, u: int, v: int, value: float) -> None:
        """Store an oracle answer for ``(u, v)`` and mark the pair queried."""
        _check_pair(u, v, self.n)
        if self.f[u, v]:
            raise ValueError(f"pair ({u}, {v}) has already been queried")
        if not np.isfinite(value) or abs(value) > 1:
            raise ValueError(f"answer {value!r} for pair ({u}, {v}) is outside [-1, 1]")
        self.s[u, v] = self.s[v, u] = value
        self.f[u, v] = self.f[v, u] = True

    def unqueried_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Upper-triangle ``(rows, cols)`` of all pairs not yet queried."""
        rows, cols = np.triu_indices(self.n, k=1)
        keep = ~self.f[rows, cols]
        return rows[keep], cols[keep]

    def n_queried(self) -> int:
        return int(np.count_nonzero(np.triu(self.f, k=1)))


def _check_pair(u: int, v: int, n: int) -> None:
    if not (0 <= u < n and 0 <= v < n):
        raise ValueError(f"object ids ({u}, {v}) out of range for n={n}")
    if u == v:
        raise ValueError(f"pair ({u}, {v}) is not a pair of distinct objects")


def _check_dims(c: Clustering, s: SimilarityState) -> None:
    if c.n != s.n:
        raise ValueError(f"clustering has {c.n} labels but similarity state has {s.n} objects")


def violates(u: int, v: int, c: Clustering, s: SimilarityState) -> bool:
    """True iff the pair disagrees with ``c``.

    A within-cluster pair violates when its similarity is negative; a
    between-cluster pair violates when its similarity is non-negative, so an
    unknown (zero) pair between clusters counts as a violation.
    """
    _check_dims(c, s)
    _check_pair(u, v, s.n)
    if c.labels[u] == c.labels[v]:
        return bool(s.s[u, v] < 0)
    return bool(s.s[u, v] >= 0)


def violation_matrix(c: Clustering, s: SimilarityState) -> np.ndarray:
    """Boolean N x N matrix of violating pairs (zero diagonal)."""
    _check_dims(c, s)
    same = c.labels[:, None] == c.labels[None, :]
    out = np.where(same, s.s < 0, s.s >= 0)
    np.fill_diagonal(out, False)
    return out


def cc_cost(c: Clustering, s: SimilarityState) -> float:
    """Correlation-clustering cost: total |S_uv| over violating pairs."""
    viol = violation_matrix(c, s)
    return float(np.sum(np.triu(np.abs(s.s) * viol, k=1)))


def mc_cost(c: Clustering, s: SimilarityState) -> float:
    """Max-correlation cost: minus the sum of within-cluster similarities."""
    _check_dims(c, s)
    same = c.labels[:, None] == c.labels[None, :]
    return float(-np.sum(np.triu(np.where(same, s.s, 0.0), k=1)))
