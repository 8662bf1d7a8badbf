"""Undirected graph storage, edge-list I/O and the Laplacian products used by the solver."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

COMMENT_PREFIXES = ("#", "%")


class GraphFormatError(ValueError):
    """Raised for malformed or unusable graph / label files."""


@dataclass(frozen=True)
class SparseAdjacency:
    """Symmetric nonnegative adjacency matrix in CSR form.

    The matrix doubles as the similarity matrix of the graph regularizer,
    and ``degree`` is the diagonal of the degree matrix.
    """

    matrix: sparse.csr_matrix
    degree: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = sparse.csr_matrix(self.matrix, dtype=np.float64)
        m.eliminate_zeros()
        m.sum_duplicates()
        m.sort_indices()
        if m.shape[0] != m.shape[1]:
            raise GraphFormatError(f"adjacency must be square, got {m.shape}")
        if m.nnz and m.data.min() < 0:
            raise GraphFormatError("adjacency weights must be nonnegative")
        if m.diagonal().any():
            raise GraphFormatError("adjacency must not contain self-loops")
        if (m != m.T).nnz:
            raise GraphFormatError("adjacency must be symmetric")
        m.data.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        deg = np.asarray(m.sum(axis=1)).ravel()
        deg.setflags(write=False)
        object.__setattr__(self, "degree", deg)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    @property
    def n_edges(self) -> int:
        """Number of undirected edges (each stored twice)."""
        return self.matrix.nnz // 2

    @property
    def total_weight(self) -> float:
        """Sum of all stored entries, i.e. 2m for an unweighted graph."""
        return float(self.matrix.data.sum())

    @property
    def frobenius_sq(self) -> float:
        return float(np.dot(self.matrix.data, self.matrix.data))

    def entries(self):
        """Yield stored ``(row, col, weight)`` triples in CSR order."""
        m = self.matrix
        for i in range(m.shape[0]):
            for p in range(m.indptr[i], m.indptr[i + 1]):
                yield i, int(m.indices[p]), float(m.data[p])

    def n_components(self) -> int:
        return int(csgraph.connected_components(self.matrix, directed=False)[0])

    @classmethod
    def from_edges(cls, n: int, rows, cols, weights=None) -> "SparseAdjacency":
        """Symmetrize an edge list, dropping self-loops and collapsing duplicates.

        Unweighted input is binarized. Weighted input sums repeated listings
        of the same directed pair, and a pair listed in both directions keeps
        the larger directional total, so writing each edge once or twice
        gives the same matrix.
        """
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        keep = rows != cols
        rows, cols = rows[keep], cols[keep]
        if weights is None:
            w = np.ones(len(rows))
        else:
            w = np.asarray(weights, dtype=np.float64)[keep]
        directed = sparse.coo_matrix((w, (rows, cols)), shape=(n, n)).tocsr()
        directed.sum_duplicates()
        if weights is None:
            directed.data[:] = 1.0
        return cls(directed.maximum(directed.T))


@dataclass(frozen=True)
class NodeIndex:
    """Bijection between original node tokens and dense indices."""

    labels: tuple

    def __post_init__(self):
        lookup = {lab: i for i, lab in enumerate(self.labels)}
        if len(lookup) != len(self.labels):
            raise ValueError("node labels must be unique")
        object.__setattr__(self, "_lookup", lookup)

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, label: str) -> int:
        return self._lookup[label]

    def __contains__(self, label) -> bool:
        return label in self._lookup

    @classmethod
    def identity(cls, n: int) -> "NodeIndex":
        return cls(tuple(str(i) for i in range(n)))


@dataclass(frozen=True)
class GroundTruth:
    labels: np.ndarray

    @property
    def n_communities(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0


def canonicalize(labels) -> np.ndarray:
    """Relabel to 0..C-1 in order of first appearance."""
    seen: dict = {}
    return np.array([seen.setdefault(lab, len(seen)) for lab in labels], dtype=np.int64)


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith(COMMENT_PREFIXES):
                continue
            yield lineno, line.split()


def load_edge_list(path, largest_component: bool = False):
    """Read a whitespace-separated edge list into ``(SparseAdjacency, NodeIndex)``.

    Each data line holds two node tokens and an optional positive weight.
    Node indices follow order of first appearance. Self-loops are dropped
    (their tokens still receive an index) and duplicate edges collapse.
    """
    index: dict = {}
    rows, cols, weights = [], [], []
    weighted = False
    for lineno, toks in _data_lines(path):
        if len(toks) not in (2, 3):
            raise GraphFormatError(f"{path}:{lineno}: expected 2 or 3 tokens, got {len(toks)}")
        if len(toks) == 3:
            try:
                w = float(toks[2])
            except ValueError:
                raise GraphFormatError(f"{path}:{lineno}: weight {toks[2]!r} is not a number") from None
            if not np.isfinite(w) or w <= 0:
                raise GraphFormatError(f"{path}:{lineno}: weight must be finite and > 0, got {w}")
            weighted = True
        else:
            w = 1.0
        rows.append(index.setdefault(toks[0], len(index)))
        cols.append(index.setdefault(toks[1], len(index)))
        weights.append(w)

    adj = SparseAdjacency.from_edges(len(index), rows, cols, weights if weighted else None)
    if adj.nnz == 0:
        raise GraphFormatError(f"{path}: graph is empty after self-loop removal")
    nodes = NodeIndex(tuple(index))
    if largest_component:
        adj, nodes = restrict_to_largest_component(adj, nodes)
    return adj, nodes


def restrict_to_largest_component(adj: SparseAdjacency, nodes: NodeIndex):
    _, comp = csgraph.connected_components(adj.matrix, directed=False)
    sizes = np.bincount(comp)
    # ties resolved toward the component containing the lowest node index
    keep = np.flatnonzero(comp == np.argmax(sizes))
    sub = adj.matrix[keep][:, keep]
    return SparseAdjacency(sub), NodeIndex(tuple(nodes.labels[i] for i in keep))


def save_edge_list(path, adj: SparseAdjacency, nodes: NodeIndex | None = None, weights: bool | None = None):
    """Write each undirected edge once (upper triangle)."""
    nodes = nodes or NodeIndex.identity(adj.n)
    if weights is None:
        weights = not np.all(adj.matrix.data == 1.0)
    upper = sparse.triu(adj.matrix, k=1).tocoo()
    order = np.lexsort((upper.col, upper.row))
    with open(path, "w", encoding="utf-8") as fh:
        for k in order:
            i, j, w = upper.row[k], upper.col[k], upper.data[k]
            if weights:
                fh.write(f"{nodes.labels[i]} {nodes.labels[j]} {float(w)!r}\n")
            else:
                fh.write(f"{nodes.labels[i]} {nodes.labels[j]}\n")


def load_ground_truth(path, index: NodeIndex) -> GroundTruth:
    raw: dict = {}
    unknown = []
    for lineno, toks in _data_lines(path):
        if len(toks) != 2:
            raise GraphFormatError(f"{path}:{lineno}: expected 'node community', got {len(toks)} tokens")
        node, comm = toks
        if node not in index:
            unknown.append(node)
            continue
        raw[index[node]] = comm
    if unknown:
        raise GraphFormatError(f"{path}: unknown node tokens: {', '.join(unknown)}")
    missing = [index.labels[i] for i in range(len(index)) if i not in raw]
    if missing:
        raise GraphFormatError(f"{path}: nodes without a label: {', '.join(missing)}")
    return GroundTruth(canonicalize(raw[i] for i in range(len(index))))


def save_ground_truth(path, truth: GroundTruth, nodes: NodeIndex | None = None):
    nodes = nodes or NodeIndex.identity(len(truth.labels))
    with open(path, "w", encoding="utf-8") as fh:
        for lab, c in zip(nodes.labels, truth.labels):
            fh.write(f"{lab} {int(c)}\n")


def _check_rows(adj: SparseAdjacency, M: np.ndarray):
    if M.ndim != 2 or M.shape[0] != adj.n:
        raise ValueError(f"expected a matrix with {adj.n} rows, got shape {M.shape}")


def spmm(adj: SparseAdjacency, M: np.ndarray) -> np.ndarray:
    """Sparse-dense product ``A @ M`` (equal to ``A.T @ M`` by symmetry)."""
    M = np.asarray(M, dtype=np.float64)
    _check_rows(adj, M)
    return adj.matrix @ M


def laplacian_product(adj: SparseAdjacency, Y: np.ndarray) -> np.ndarray:
    """``L @ Y`` with ``L = D - A``."""
    Y = np.asarray(Y, dtype=np.float64)
    _check_rows(adj, Y)
    return adj.degree[:, None] * Y - adj.matrix @ Y


def laplacian_quadratic(adj: SparseAdjacency, Y: np.ndarray) -> float:
    """``Tr(Y^T L Y)`` evaluated as ``sum_k y_k^T D y_k - y_k^T A y_k``."""
    Y = np.asarray(Y, dtype=np.float64)
    _check_rows(adj, Y)
    dterm = float(np.sum(adj.degree[:, None] * Y * Y))
    sterm = float(np.sum(Y * (adj.matrix @ Y)))
    return dterm - sterm


def degree_histogram(adj: SparseAdjacency) -> dict:
    values, counts = np.unique(adj.degree, return_counts=True)
    return {float(v): int(c) for v, c in zip(values, counts)}
