from __future__ import annotations

import numpy as np

from .model import Clustering


def _pairs(x: np.ndarray) -> float:
    x = x.astype(np.float64)
    return float(np.sum(x * (x - 1) / 2.0))


def contingency_table(a, b) -> np.ndarray:
    a = Clustering(a).labels if not isinstance(a, Clustering) else a.labels
    b = Clustering(b).labels if not isinstance(b, Clustering) else b.labels
    if a.size != b.size:
        raise ValueError(f"clusterings differ in length ({a.size} vs {b.size})")
    table = np.zeros((a.max() + 1, b.max() + 1), dtype=np.int64)
    np.add.at(table, (a, b), 1)
    return table


def adjusted_rand_index(c1, c2) -> float:
    """Adjusted Rand index between two partitions of the same objects.

    Accepts :class:`Clustering` instances or raw label vectors.  When the
    chance-corrected denominator vanishes (both partitions all singletons,
    or both a single cluster) the partitions are identical and 1.0 is returned.
    """
    table = contingency_table(c1, c2)
    n = int(table.sum())
    index = _pairs(table)
    rows = _pairs(table.sum(axis=1))
    cols = _pairs(table.sum(axis=0))
    total = n * (n - 1) / 2.0
    expected = rows * cols / total if total else 0.0
    max_index = 0.5 * (rows + cols)
    denom = max_index - expected
    if denom == 0:
        return 1.0
    return float((index - expected) / denom)
