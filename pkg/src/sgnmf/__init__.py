"""Symmetry- and graph-regularized NMF for community detection."""

__version__ = "0.1.0"

from .factorization import (  # noqa: E402
    FactorPair,
    IterationTrace,
    NumericalError,
    SolverConfig,
    Variant,
    grad_x,
    grad_y,
    init_factors,
    objective_sgnmf,
    solve,
    update_nmf,
    update_sgnmf,
    update_snmf_adjusted,
    update_snmf_naive,
)
from .graph import (  # noqa: E402
    GraphFormatError,
    GroundTruth,
    NodeIndex,
    SparseAdjacency,
    laplacian_quadratic,
    load_edge_list,
    load_ground_truth,
    spmm,
)
from .metrics import aggregate, assign_communities, modularity, nmi  # noqa: E402
