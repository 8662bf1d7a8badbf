"""Hard community assignment and partition scores (NMI, modularity)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .graph import SparseAdjacency


def assign_communities(Y) -> np.ndarray:
    """Row-wise argmax of the membership matrix; ties go to the lowest column."""
    Y = np.asarray(Y)
    if Y.ndim != 2 or Y.size == 0:
        raise ValueError(f"expected a nonempty 2-D membership matrix, got shape {Y.shape}")
    return np.argmax(Y, axis=1)


def contingency(p, q) -> np.ndarray:
    _, pi = np.unique(p, return_inverse=True)
    _, qi = np.unique(q, return_inverse=True)
    table = sparse.coo_matrix((np.ones(len(pi)), (pi, qi)), shape=(pi.max() + 1, qi.max() + 1))
    return table.toarray()


def _entropy(counts: np.ndarray, n: int) -> float:
    pk = counts[counts > 0] / n
    return float(-np.sum(pk * np.log(pk)))


def nmi(p, q) -> float:
    """Normalized mutual information ``2 I(p;q) / (H(p) + H(q))`` in nats.

    When both entropies vanish (both partitions are a single cluster) the
    score is 1.0; if only the denominator vanishes otherwise it is 0.0.
    """
    p = np.asarray(p)
    q = np.asarray(q)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError(f"partitions must be 1-D of equal length, got {p.shape} and {q.shape}")
    n = len(p)
    if n == 0:
        raise ValueError("partitions must be nonempty")
    table = contingency(p, q)
    hp = _entropy(table.sum(axis=1), n)
    hq = _entropy(table.sum(axis=0), n)
    if hp + hq == 0.0:
        return 1.0
    nz = table > 0
    pij = table[nz] / n
    outer = np.outer(table.sum(axis=1), table.sum(axis=0))[nz] / n**2
    mi = float(np.sum(pij * np.log(pij / outer)))
    return float(min(max(2.0 * mi / (hp + hq), 0.0), 1.0))


def modularity(adj: SparseAdjacency, labels) -> float:
    """Newman-Girvan modularity of a hard partition.

    Uses the per-community form ``sum_c [e_c / 2m - (d_c / 2m)^2]`` where
    ``e_c`` is the stored weight inside community ``c`` and ``d_c`` its
    total degree.
    """
    labels = np.asarray(labels)
    if labels.shape != (adj.n,):
        raise ValueError(f"expected {adj.n} labels, got shape {labels.shape}")
    two_m = adj.total_weight
    if two_m <= 0:
        raise ValueError("modularity is undefined for a graph with zero total weight")
    _, c = np.unique(labels, return_inverse=True)
    coo = adj.matrix.tocoo()
    same = c[coo.row] == c[coo.col]
    inside = np.bincount(c[coo.row[same]], weights=coo.data[same], minlength=c.max() + 1)
    dsum = np.bincount(c, weights=adj.degree, minlength=c.max() + 1)
    return float(np.sum(inside / two_m - (dsum / two_m) ** 2))


@dataclass(frozen=True)
class MetricSummary:
    values: tuple
    mean: float
    std: float

    def as_dict(self) -> dict:
        return {"values": list(self.values), "mean": self.mean, "std": self.std}


def aggregate(values) -> MetricSummary:
    """Mean and sample standard deviation (ddof=1; 0.0 for a single run)."""
    vals = tuple(float(v) for v in values)
    if not vals:
        raise ValueError("cannot aggregate an empty list of runs")
    arr = np.asarray(vals)
    if len(arr) == 1 or np.all(arr == arr[0]):
        std = 0.0
    else:
        std = float(np.std(arr, ddof=1))
    return MetricSummary(vals, float(np.mean(arr)), std)
