import os
from pathlib import Path

import numpy as np
import pytest
from scipy import sparse

from sgnmf.graph import SparseAdjacency

DATA_DIR = Path(os.environ.get("SGNMF_DATA", Path(__file__).resolve().parent.parent / "data"))


def random_graph(rng, n, p=0.3, weighted=False):
    """Erdos-Renyi graph; retries until at least one edge exists."""
    while True:
        upper = np.triu(rng.random((n, n)) < p, k=1).astype(float)
        if weighted:
            upper *= rng.uniform(0.5, 2.0, size=(n, n))
        if upper.any():
            return SparseAdjacency(sparse.csr_matrix(upper + upper.T))


def two_cycle():
    return SparseAdjacency(sparse.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]])))


def two_triangles():
    rows = [0, 0, 1, 3, 3, 4]
    cols = [1, 2, 2, 4, 5, 5]
    return SparseAdjacency.from_edges(6, rows, cols)


def dataset_paths(name):
    """(edge file, label file) under the data directory, or skip the test."""
    edges, labels = DATA_DIR / f"{name}.txt", DATA_DIR / f"{name}.labels"
    if not (edges.exists() and labels.exists()):
        pytest.skip(f"{name} dataset not found in {DATA_DIR} (see data/README.md)")
    return edges, labels


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# (criterion, status, detail) lines collected by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{status:4}  {name}: {detail}")
