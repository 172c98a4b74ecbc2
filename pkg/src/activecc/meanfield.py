"""Mean-field approximation of the Gibbs distribution over clusterings.

The posterior is a factorial distribution ``Q`` (N x K, row-stochastic)
obtained by iterating ``Q = softmax(-beta * M)`` and ``M = -S Q``.  Pairwise
same-cluster probabilities ``Q Q^T`` feed the binary-entropy acquisition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SimilarityState

# clamp for log arguments; keeps entropy finite at p in {0, 1}
PROB_CLAMP = 1e-12


@dataclass(frozen=True)
class MeanFieldParams:
    k: int
    beta: float = 1.0
    max_iters: int = 100
    tol: float = 1e-6
    damping: float = 0.5
    rng_seed: int | None = 0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if not 0 <= self.damping < 1:
            raise ValueError("damping must lie in [0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True)
class MeanFieldPosterior:
    q: np.ndarray
    m: np.ndarray
    converged: bool
    iters_used: int


def softmax_rows(x: np.ndarray) -> np.ndarray:
    z = x - x.max(axis=1, keepdims=True)
    np.exp(z, out=z)
    z /= z.sum(axis=1, keepdims=True)
    return z


def mean_field(
    s: SimilarityState | np.ndarray,
    params: MeanFieldParams,
    init_q: np.ndarray | None = None,
) -> MeanFieldPosterior:
    """Run damped synchronous mean-field updates until ``max|dQ| <= tol``.

    The returned ``Q`` is ``softmax(-beta * M)`` of the last ``M``, so a
    stationary ``M`` gives an exact fixed point.

    ``M`` starts i.i.d. uniform on [-0.01, 0.01] unless ``init_q`` is given,
    in which case the iteration is warm-started from ``M = -S init_q``.
    """
    sim = s.s if isinstance(s, SimilarityState) else np.asarray(s, dtype=np.float64)
    if not np.all(np.isfinite(sim)):
        raise ValueError("similarity matrix contains non-finite entries")
    n = sim.shape[0]
    rng = np.random.default_rng(params.rng_seed)
    if init_q is not None:
        init_q = np.asarray(init_q, dtype=np.float64)
        if init_q.shape != (n, params.k):
            raise ValueError(f"init_q has shape {init_q.shape}, expected {(n, params.k)}")
        m = -sim @ init_q
    else:
        m = rng.uniform(-0.01, 0.01, size=(n, params.k))

    q = softmax_rows(-params.beta * m)
    m = -sim @ q
    converged = False
    it = 1
    while it < params.max_iters:
        update = softmax_rows(-params.beta * m)
        new_q = (1.0 - params.damping) * update + params.damping * q
        delta = np.max(np.abs(new_q - q)) if n else 0.0
        q = new_q
        m = -sim @ q
        it += 1
        if delta <= params.tol:
            converged = True
            break
    # finish with an undamped step so Q is the image of the final M
    q = softmax_rows(-params.beta * m)
    m = -sim @ q
    return MeanFieldPosterior(q=q, m=m, converged=converged, iters_used=it)


def same_cluster_prob(q: np.ndarray, u: int, v: int) -> float:
    """Approximate probability that ``u`` and ``v`` share a cluster."""
    n = q.shape[0]
    if not (0 <= u < n and 0 <= v < n):
        raise IndexError(f"object ids ({u}, {v}) out of range for n={n}")
    if u == v:
        raise ValueError("same_cluster_prob needs two distinct objects")
    return float(np.clip(q[u] @ q[v], 0.0, 1.0))


def _binary_entropy(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    return -p * np.log(p) - (1.0 - p) * np.log1p(-p)


def entropy_score(p: float) -> float:
    """Binary entropy of ``p`` in nats."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p!r} outside [0, 1]")
    return float(_binary_entropy(np.float64(p)))


def entropy_matrix(q: np.ndarray) -> np.ndarray:
    """Pairwise same-cluster entropies; symmetric with a zero diagonal."""
    p = q @ q.T
    h = _binary_entropy(p)
    upper = np.triu(h, k=1)
    return upper + upper.T
