"""Datasets, the simulated noisy oracle and initial similarity matrices."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.cluster import KMeans

from .model import Clustering, SimilarityState, canonical_labels


class DataLoadError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    labels: np.ndarray
    features: np.ndarray | None = None

    def __post_init__(self):
        labels = canonical_labels(self.labels)
        object.__setattr__(self, "labels", labels)
        if self.features is not None:
            feats = np.asarray(self.features, dtype=np.float64)
            if feats.ndim != 2 or feats.shape[0] != labels.size:
                raise ValueError("features must be an N x D matrix matching the labels")
            if not np.all(np.isfinite(feats)):
                raise ValueError("features contain non-finite values")
            object.__setattr__(self, "features", feats)

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1

    def truth(self) -> Clustering:
        return Clustering(self.labels)


@dataclass(frozen=True)
class OracleConfig:
    gamma: float = 0.4
    rng_seed: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")


def ground_truth_similarity(labels, u: int, v: int) -> int:
    """+1 when ``u`` and ``v`` share a class, -1 otherwise."""
    n = len(labels)
    if not (0 <= u < n and 0 <= v < n):
        raise IndexError(f"object ids ({u}, {v}) out of range for n={n}")
    if u == v:
        raise ValueError("ground_truth_similarity needs two distinct objects")
    return 1 if labels[u] == labels[v] else -1


def noisy_oracle(labels, u: int, v: int, cfg: OracleConfig, rng: np.random.Generator) -> float:
    """Truth with probability ``1 - gamma``, else a uniform draw on [-1, 1].

    Two uniforms are always consumed so the stream position does not depend
    on which branch was taken.
    """
    truth = ground_truth_similarity(labels, u, v)
    flip, noise = rng.random(2)
    if flip < cfg.gamma:
        return float(2.0 * noise - 1.0)
    return float(truth)


class NoisyOracle:
    """Stateful oracle for one run; answers are reproducible for a fixed seed and query order."""

    def __init__(self, labels, cfg: OracleConfig, rng: np.random.Generator | None = None):
        self.labels = np.asarray(labels)
        self.cfg = cfg
        self.rng = rng if rng is not None else np.random.default_rng(cfg.rng_seed)
        self.n_queries = 0

    def query(self, u: int, v: int) -> float:
        self.n_queries += 1
        return noisy_oracle(self.labels, u, v, self.cfg, self.rng)

    def __call__(self, u: int, v: int) -> float:
        return self.query(u, v)


def synthetic_dataset(
    n: int,
    k: int,
    dim: int = 16,
    spread: float = 1.0,
    rng: np.random.Generator | int | None = None,
) -> Dataset:
    """Size-balanced Gaussian blobs.

    Class ``i`` gets ``ceil(n/k)`` or ``floor(n/k)`` members.  Blob centres are
    uniform in a hypercube whose side grows like ``sqrt(k)`` so that unit
    spread blobs stay well apart.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise ValueError(f"need at least as many objects as classes (n={n}, k={k})")
    rng = np.random.default_rng(rng)
    labels = np.arange(n) * k // n
    half_side = 5.0 * math.sqrt(k)
    centres = rng.uniform(-half_side, half_side, size=(k, dim))
    features = centres[labels] + spread * rng.standard_normal((n, dim))
    return Dataset(labels=labels, features=features)


def _parse_row(row: list[str], lineno: int) -> tuple[list[float], int]:
    try:
        feats = [float(x) for x in row[:-1]]
    except ValueError as exc:
        raise DataLoadError(f"row {lineno}: cannot parse features ({exc})") from None
    if not all(math.isfinite(x) for x in feats):
        raise DataLoadError(f"row {lineno}: non-finite feature value")
    try:
        label = int(row[-1].strip())
    except ValueError:
        raise DataLoadError(f"row {lineno}: label {row[-1]!r} is not an integer") from None
    return feats, label


def _looks_like_header(row: list[str]) -> bool:
    for cell in row:
        try:
            float(cell)
        except ValueError:
            return True
    return False


def load_feature_csv(path: str | Path) -> Dataset:
    """Read a comma-separated file of ``feature_1, ..., feature_D, label`` rows.

    A first row containing any non-numeric cell is taken as a header.  Class
    labels are remapped to ``0..C-1`` in order of first appearance.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = [(i + 1, r) for i, r in enumerate(csv.reader(fh)) if any(c.strip() for c in r)]
    except OSError as exc:
        raise DataLoadError(f"cannot read {path}: {exc}") from None
    if rows and _looks_like_header(rows[0][1]):
        rows = rows[1:]
    if not rows:
        raise DataLoadError(f"{path} contains no data rows")

    width = len(rows[0][1])
    if width < 2:
        raise DataLoadError(f"row {rows[0][0]}: need at least one feature and a label")
    feats, labels = [], []
    for lineno, row in rows:
        if len(row) != width:
            raise DataLoadError(f"row {lineno}: expected {width} columns, found {len(row)}")
        f, y = _parse_row(row, lineno)
        feats.append(f)
        labels.append(y)
    return Dataset(labels=np.array(labels), features=np.array(feats, dtype=np.float64))


def kmeans(
    features: np.ndarray | None,
    k: int,
    max_iters: int = 300,
    rng: np.random.Generator | int | None = None,
) -> Clustering:
    """Lloyd's k-means from k-means++ seeds (single initialisation)."""
    if features is None:
        raise ValueError("k-means initialisation needs feature vectors")
    features = np.asarray(features, dtype=np.float64)
    if not 1 <= k <= features.shape[0]:
        raise ValueError(f"k={k} must lie in [1, {features.shape[0]}]")
    seed = int(np.random.default_rng(rng).integers(2**31 - 1))
    model = KMeans(n_clusters=k, init="k-means++", n_init=1, max_iter=max_iters, random_state=seed)
    return Clustering(model.fit_predict(features))


def init_similarity(
    kind: str,
    dataset: Dataset,
    k_init: int | None = None,
    scale: float = 0.01,
    rng: np.random.Generator | int | None = None,
) -> SimilarityState:
    """Starting similarity matrix: all zeros, or a weak +-scale k-means prior.

    Nothing is marked queried, so prior entries can be overwritten by the oracle.
    """
    n = dataset.n
    if kind == "zero":
        return SimilarityState.zeros(n)
    if kind != "kmeans":
        raise ValueError(f"unknown initialisation {kind!r}")
    if not 0 <= scale <= 1:
        raise ValueError("scale must lie in [0, 1]")
    k = k_init if k_init is not None else dataset.n_classes
    labels = kmeans(dataset.features, k, rng=rng).labels
    s = np.where(labels[:, None] == labels[None, :], scale, -scale)
    np.fill_diagonal(s, 0.0)
    return SimilarityState(s)


def reveal_pairs(
    s: SimilarityState,
    labels,
    fraction: float,
    rng: np.random.Generator,
    mark_queried: bool = True,
) -> int:
    """Write noise-free truths for a random ``fraction`` of all pairs into ``s``.

    Returns the number of pairs revealed.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    rows, cols = np.triu_indices(s.n, k=1)
    count = int(round(fraction * rows.size))
    if count == 0:
        return 0
    idx = np.sort(rng.choice(rows.size, size=count, replace=False))
    labels = np.asarray(labels)
    for u, v in zip(rows[idx].tolist(), cols[idx].tolist()):
        value = float(ground_truth_similarity(labels, u, v))
        if mark_queried:
            s.record(u, v, value)
        else:
            s.s[u, v] = s.s[v, u] = value
    return count
