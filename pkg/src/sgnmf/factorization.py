"""Objectives, gradients and multiplicative updates for the NMF family.

All variants approximate the adjacency ``A`` by ``X @ Y.T`` with nonnegative
``X, Y`` of shape ``(n, k)``. The symmetric variants keep a single factor and
report it as both ``X`` and ``Y``. The regularized model minimizes

    1/2 ||X Y^T - A||_F^2 + alpha/2 ||X - Y||_F^2 + lam/2 Tr(Y^T L Y)

with ``L = D - A``. No ``n x n`` dense matrix is ever formed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .graph import SparseAdjacency, spmm

DEFAULT_ALPHA = 2.0**-8
DEFAULT_LAMBDA = 100.0


class Variant(str, enum.Enum):
    NMF = "nmf"
    SNMF_NAIVE = "snmf"
    SNMF_ADJUSTED = "snmf-adj"
    SGNMF = "sgnmf"

    @property
    def symmetric(self) -> bool:
        return self in (Variant.SNMF_NAIVE, Variant.SNMF_ADJUSTED)


class NumericalError(ArithmeticError):
    """The objective became non-finite during a solve."""

    def __init__(self, iteration: int, value: float):
        super().__init__(f"non-finite objective {value!r} at iteration {iteration}")
        self.iteration = iteration
        self.value = value


@dataclass(frozen=True)
class SolverConfig:
    variant: Variant = Variant.SGNMF
    k: int = 2
    alpha: float = DEFAULT_ALPHA
    lam: float = DEFAULT_LAMBDA
    seed: int = 0
    max_iters: int = 200
    tol: float = 0.1
    init_scale: float = 0.05
    eps: float = 1e-12
    # compare |O_t - O_{t-1}| / |O_{t-1}| against tol instead of the absolute gap
    relative_tol: bool = False
    # keep lam*L*Y in both numerator and denominator of the Y step, as printed
    # in the original update; can produce negative entries, comparison only
    unsplit_laplacian: bool = False

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.alpha < 0 or self.lam < 0:
            raise ValueError("alpha and lam must be nonnegative")
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if not self.init_scale > 0:
            raise ValueError(f"init_scale must be > 0, got {self.init_scale}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")


@dataclass
class FactorPair:
    X: np.ndarray
    Y: np.ndarray

    def __iter__(self):
        return iter((self.X, self.Y))


@dataclass
class IterationTrace:
    objective: list = field(default_factory=list)
    iters_run: int = 0
    terminated_by: str = "max_iters"
    kkt_residual: float = float("nan")


def init_factors(n: int, k: int, seed: int, init_scale: float = 0.05, symmetric: bool = False) -> FactorPair:
    """Uniform draws on ``(0, init_scale)`` from a PCG64 stream.

    ``X`` is drawn first, then ``Y``. With ``symmetric`` only ``X`` is drawn
    and shared as ``Y``.
    """
    if n < 1 or k < 1:
        raise ValueError(f"n and k must be >= 1, got n={n}, k={k}")
    rng = np.random.Generator(np.random.PCG64(seed))

    def draw():
        u = rng.random((n, k))
        # random() is on [0, 1); exclude the endpoint 0
        u[u == 0.0] = np.finfo(np.float64).tiny
        return init_scale * u

    X = draw()
    return FactorPair(X, X.copy() if symmetric else draw())


def _check(adj: SparseAdjacency, *mats):
    shape = mats[0].shape
    for M in mats:
        if M.ndim != 2 or M.shape[0] != adj.n or M.shape != shape:
            raise ValueError(f"factor shapes {[m.shape for m in mats]} inconsistent with n={adj.n}")


def _laplacian_quad(adj, Y, AY):
    return float(np.sum(adj.degree[:, None] * Y * Y) - np.sum(Y * AY))


def objective_sgnmf(adj: SparseAdjacency, X, Y, alpha: float, lam: float, AY=None) -> float:
    """Regularized objective via ``Tr((X^T X)(Y^T Y)) - 2 Tr(X^T A Y) + ||A||^2``.

    ``AY`` may be passed in when the caller already holds ``A @ Y``.
    """
    _check(adj, X, Y)
    if AY is None:
        AY = spmm(adj, Y)
    fit = np.sum((X.T @ X) * (Y.T @ Y)) - 2.0 * np.sum(X * AY) + adj.frobenius_sq
    obj = 0.5 * fit
    if alpha:
        obj += 0.5 * alpha * np.sum((X - Y) ** 2)
    if lam:
        obj += 0.5 * lam * _laplacian_quad(adj, Y, AY)
    return float(obj)


def objective(adj: SparseAdjacency, X, Y, config: SolverConfig, AY=None) -> float:
    """Objective tracked by ``solve`` for ``config.variant``.

    The baselines use their unscaled squared-error losses; the regularized
    model uses its half-scaled form.
    """
    v = config.variant
    if v is Variant.SGNMF:
        return objective_sgnmf(adj, X, Y, config.alpha, config.lam, AY)
    if v.symmetric:
        Y = X
        AY = None
    return 2.0 * objective_sgnmf(adj, X, Y, 0.0, 0.0, AY)


def grad_x(adj: SparseAdjacency, X, Y, alpha: float) -> np.ndarray:
    _check(adj, X, Y)
    return X @ (Y.T @ Y) - spmm(adj, Y) + alpha * (X - Y)


def grad_y(adj: SparseAdjacency, X, Y, alpha: float, lam: float) -> np.ndarray:
    _check(adj, X, Y)
    AY = spmm(adj, Y)
    LY = adj.degree[:, None] * Y - AY
    return Y @ (X.T @ X) - spmm(adj, X) - alpha * X + alpha * Y + lam * LY


def update_nmf(adj: SparseAdjacency, X, Y, eps: float = 1e-12, AY=None) -> FactorPair:
    """One Lee-Seung sweep: X first, then Y against the new X."""
    _check(adj, X, Y)
    if AY is None:
        AY = spmm(adj, Y)
    X = X * AY / (X @ (Y.T @ Y) + eps)
    AX = spmm(adj, X)
    Y = Y * AX / (Y @ (X.T @ X) + eps)
    return FactorPair(X, Y)


def update_snmf_naive(adj: SparseAdjacency, X, eps: float = 1e-12) -> np.ndarray:
    _check(adj, X)
    return X * spmm(adj, X) / (X @ (X.T @ X) + eps)


def update_snmf_adjusted(adj: SparseAdjacency, X, eps: float = 1e-12) -> np.ndarray:
    """Damped symmetric update: the multiplier never drops below 0.5."""
    _check(adj, X)
    return X * (0.5 + spmm(adj, X) / (2.0 * (X @ (X.T @ X)) + eps))


def update_sgnmf(adj: SparseAdjacency, X, Y, alpha: float, lam: float, eps: float = 1e-12,
                 AY=None, unsplit_laplacian: bool = False) -> FactorPair:
    """One sweep of the regularized multiplicative rules.

    The Laplacian term of the Y step is split as ``L = D - A``: ``lam*A*Y``
    joins the numerator and ``lam*D*Y`` the denominator, which keeps every
    factor nonnegative. With ``alpha == lam == 0`` the result is bitwise
    equal to :func:`update_nmf`.
    """
    _check(adj, X, Y)
    if AY is None:
        AY = spmm(adj, Y)
    X = X * (AY + alpha * Y) / (X @ (Y.T @ Y) + alpha * X + eps)
    AX = spmm(adj, X)
    # Y is unchanged by the X step, so AY is still A @ Y here
    if unsplit_laplacian:
        LY = adj.degree[:, None] * Y - AY
        num = AX + alpha * X + lam * LY
        den = Y @ (X.T @ X) + alpha * Y + lam * LY + eps
    else:
        num = AX + alpha * X + lam * AY
        den = Y @ (X.T @ X) + alpha * Y + lam * (adj.degree[:, None] * Y) + eps
    return FactorPair(X, Y * num / den)


def kkt_residual(adj: SparseAdjacency, X, Y, config: SolverConfig) -> float:
    """Largest complementarity violation ``max |min(factor, gradient)|``.

    For the symmetric variants the gradient is that of the single-factor
    loss, scaled by 1/4.
    """
    if config.variant.symmetric:
        g = X @ (X.T @ X) - spmm(adj, X)
        return float(np.max(np.abs(np.minimum(X, g))))
    if config.variant is Variant.NMF:
        alpha, lam = 0.0, 0.0
    else:
        alpha, lam = config.alpha, config.lam
    gx = grad_x(adj, X, Y, alpha)
    gy = grad_y(adj, X, Y, alpha, lam)
    return float(max(np.max(np.abs(np.minimum(X, gx))), np.max(np.abs(np.minimum(Y, gy)))))


def _step(adj, X, Y, AY, config: SolverConfig):
    v = config.variant
    if v is Variant.SGNMF:
        return update_sgnmf(adj, X, Y, config.alpha, config.lam, config.eps, AY=AY,
                            unsplit_laplacian=config.unsplit_laplacian)
    if v is Variant.NMF:
        return update_nmf(adj, X, Y, config.eps, AY=AY)
    if v is Variant.SNMF_NAIVE:
        X = update_snmf_naive(adj, X, config.eps)
    else:
        X = update_snmf_adjusted(adj, X, config.eps)
    return FactorPair(X, X)


def solve(adj: SparseAdjacency, config: SolverConfig, init: FactorPair | None = None, callback=None):
    """Iterate the variant's update until the objective gap drops below ``tol``.

    Returns ``(FactorPair, IterationTrace)``. The trace records the objective
    before the first update and after every update. ``callback(t, X, Y, obj)``
    is invoked after each iteration when given.
    """
    if config.k > adj.n:
        raise ValueError(f"k={config.k} exceeds node count n={adj.n}")
    if init is None:
        init = init_factors(adj.n, config.k, config.seed, config.init_scale, config.variant.symmetric)
    X = np.array(init.X, dtype=np.float64)
    Y = X if config.variant.symmetric else np.array(init.Y, dtype=np.float64)
    _check(adj, X, Y)

    trace = IterationTrace()
    AY = spmm(adj, Y)
    prev = objective(adj, X, Y, config, AY)
    if not np.isfinite(prev):
        raise NumericalError(0, prev)
    trace.objective.append(prev)

    for t in range(1, config.max_iters + 1):
        X, Y = _step(adj, X, Y, AY, config)
        AY = spmm(adj, Y)
        cur = objective(adj, X, Y, config, AY)
        if not np.isfinite(cur):
            raise NumericalError(t, cur)
        trace.objective.append(cur)
        trace.iters_run = t
        if callback is not None:
            callback(t, X, Y, cur)
        gap = abs(cur - prev)
        if config.relative_tol:
            gap /= max(abs(prev), np.finfo(np.float64).tiny)
        if gap < config.tol:
            trace.terminated_by = "tolerance"
            break
        prev = cur

    trace.kkt_residual = kkt_residual(adj, X, Y, config)
    return FactorPair(X, Y.copy() if Y is X else Y), trace
