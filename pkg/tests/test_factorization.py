import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgnmf.factorization import (
    FactorPair,
    NumericalError,
    SolverConfig,
    Variant,
    grad_x,
    grad_y,
    init_factors,
    kkt_residual,
    objective,
    objective_sgnmf,
    solve,
    update_nmf,
    update_sgnmf,
    update_snmf_adjusted,
    update_snmf_naive,
)
from sgnmf.harness import make_planted_partition

from conftest import random_graph, two_cycle

ALPHA = 2.0**-8
HALF_ROOT = 1.0 / math.sqrt(2.0)


def trace_form(A, X, Y, alpha, lam):
    """Dense evaluation of the objective in its trace expansion."""
    L = np.diag(A.sum(axis=1)) - A
    fit = np.trace(X @ Y.T @ Y @ X.T - 2 * A @ Y @ X.T + A @ A.T)
    sym = np.trace(X @ X.T - 2 * X @ Y.T + Y @ Y.T)
    return 0.5 * fit + 0.5 * lam * np.trace(Y.T @ L @ Y) + 0.5 * alpha * sym


def central_diff(f, M, h=1e-6):
    g = np.zeros_like(M)
    for idx in np.ndindex(*M.shape):
        up, dn = M.copy(), M.copy()
        up[idx] += h
        dn[idx] -= h
        g[idx] = (f(up) - f(dn)) / (2 * h)
    return g


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


def instance(seed, n_max=12, k_max=4):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, n_max + 1))
    k = int(rng.integers(1, k_max + 1))
    adj = random_graph(rng, n, 0.4)
    X, Y = rng.uniform(0.05, 1.0, size=(2, n, k))
    alpha, lam = rng.uniform(0, 2), rng.uniform(0, 5)
    return adj, X, Y, alpha, lam


# -- initialization ---------------------------------------------------------

def test_init_deterministic_and_in_range():
    a, b = init_factors(50, 4, seed=7), init_factors(50, 4, seed=7)
    np.testing.assert_array_equal(a.X, b.X)
    np.testing.assert_array_equal(a.Y, b.Y)
    for M in a:
        assert M.shape == (50, 4)
        assert np.all(M > 0) and np.all(M < 0.05)
    c = init_factors(50, 4, seed=8)
    assert np.any(c.X != a.X)


def test_init_symmetric_shares_factor():
    f = init_factors(10, 3, seed=1, symmetric=True)
    np.testing.assert_array_equal(f.X, f.Y)
    # the symmetric draw consumes the same stream as the first factor
    np.testing.assert_array_equal(f.X, init_factors(10, 3, seed=1).X)


def test_init_pinned_values():
    # PCG64 stream is fixed by numpy's stability guarantee for Generator.random
    x = init_factors(1, 2, seed=0).X
    np.testing.assert_allclose(x, 0.05 * np.random.Generator(np.random.PCG64(0)).random((1, 2)))


# -- objective ---------------------------------------------------------------

def test_objective_hand_value():
    one = np.ones((2, 1))
    assert objective_sgnmf(two_cycle(), one, one, 0.0, 0.0) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("alpha,lam", [(0.0, 0.0), (1.0, 3.0)])
def test_objective_zero_factors(alpha, lam, rng):
    adj = random_graph(rng, 7, 0.5, weighted=True)
    Z = np.zeros((7, 2))
    assert objective_sgnmf(adj, Z, Z, alpha, lam) == pytest.approx(0.5 * adj.frobenius_sq, rel=1e-15)


@pytest.mark.parametrize("seed", range(10))
def test_objective_matches_trace_form(seed):
    adj, X, Y, alpha, lam = instance(seed, n_max=6, k_max=2)
    want = trace_form(adj.matrix.toarray(), X, Y, alpha, lam)
    assert objective_sgnmf(adj, X, Y, alpha, lam) == pytest.approx(want, rel=1e-10)


def test_objective_shape_errors():
    with pytest.raises(ValueError):
        objective_sgnmf(two_cycle(), np.ones((2, 1)), np.ones((2, 2)), 0, 0)
    with pytest.raises(ValueError):
        grad_x(two_cycle(), np.ones((3, 1)), np.ones((3, 1)), 0)


# -- gradients ---------------------------------------------------------------

def test_gradient_hand_values():
    one = np.ones((2, 1))
    np.testing.assert_allclose(grad_x(two_cycle(), one, one, 0.0), [[1.0], [1.0]])
    np.testing.assert_allclose(grad_y(two_cycle(), one, one, 0.0, 1.0), [[1.0], [1.0]])


def test_gradients_vanish_at_stationary_point():
    a = np.full((2, 1), HALF_ROOT)
    np.testing.assert_allclose(grad_x(two_cycle(), a, a, ALPHA), 0.0, atol=1e-15)
    np.testing.assert_allclose(grad_y(two_cycle(), a, a, ALPHA, 0.0), 0.0, atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_gradients_match_finite_differences(seed):
    adj, X, Y, alpha, lam = instance(seed)
    gx = central_diff(lambda M: objective_sgnmf(adj, M, Y, alpha, 0.0), X)
    gy = central_diff(lambda M: objective_sgnmf(adj, X, M, alpha, lam), Y)
    assert rel_err(grad_x(adj, X, Y, alpha), gx) < 1e-5
    assert rel_err(grad_y(adj, X, Y, alpha, lam), gy) < 1e-5


# -- single updates ----------------------------------------------------------

def test_update_hand_values():
    one = np.ones((2, 1))
    out = update_nmf(two_cycle(), one, one)
    np.testing.assert_allclose(out.X, 0.5, rtol=1e-11)
    np.testing.assert_allclose(update_snmf_naive(two_cycle(), one), 0.5, rtol=1e-11)
    np.testing.assert_allclose(update_snmf_adjusted(two_cycle(), one), 0.75, rtol=1e-11)
    out = update_sgnmf(two_cycle(), one, one, ALPHA, 0.0)
    np.testing.assert_allclose(out.X, (1 + ALPHA) / (2 + ALPHA), rtol=1e-11)


@pytest.mark.parametrize("alpha,lam", [(0.0, 0.0), (ALPHA, 0.0), (ALPHA, 100.0), (2.0, 7.0)])
def test_fixed_points_unchanged(alpha, lam):
    # X = Y = 1/sqrt(2) on the 2-cycle factorizes exactly up to the diagonal
    a = np.full((2, 1), HALF_ROOT)
    for M in update_sgnmf(two_cycle(), a, a, alpha, lam, eps=0.0):
        np.testing.assert_allclose(M, a, rtol=1e-14)
    for M in update_nmf(two_cycle(), a, a, eps=0.0):
        np.testing.assert_allclose(M, a, rtol=1e-14)
    np.testing.assert_allclose(update_snmf_naive(two_cycle(), a, eps=0.0), a, rtol=1e-14)
    np.testing.assert_allclose(update_snmf_adjusted(two_cycle(), a, eps=0.0), a, rtol=1e-14)


def test_adjusted_multiplier_floor(rng):
    adj = random_graph(rng, 9, 0.3)
    X = rng.uniform(0.01, 1, (9, 3))
    assert np.all(update_snmf_adjusted(adj, X) >= 0.5 * X)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_reduction_to_nmf(seed):
    adj, X, Y, _, _ = instance(seed, n_max=15)
    a = update_sgnmf(adj, X, Y, 0.0, 0.0)
    b = update_nmf(adj, X, Y)
    assert np.max(np.abs(a.X - b.X)) <= 1e-15
    assert np.max(np.abs(a.Y - b.Y)) <= 1e-15


def gnmf_y_step(A, X, Y, lam, eps=1e-12):
    D = np.diag(A.sum(axis=1))
    return Y * (A.T @ X + lam * A @ Y) / (Y @ X.T @ X + lam * D @ Y + eps)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_alpha_zero_is_graph_regularized_rule(seed):
    adj, X, Y, _, lam = instance(seed)
    out = update_sgnmf(adj, X, Y, 0.0, lam)
    A = adj.matrix.toarray()
    X1 = X * (A @ Y) / (X @ Y.T @ Y + 1e-12)
    np.testing.assert_allclose(out.X, X1, rtol=1e-13)
    np.testing.assert_allclose(out.Y, gnmf_y_step(A, X1, Y, lam), rtol=1e-13)


def test_unsplit_laplacian_differs_only_with_graph_term(rng):
    adj = random_graph(rng, 10, 0.4)
    X, Y = rng.uniform(0.1, 1, (2, 10, 2))
    a = update_sgnmf(adj, X, Y, ALPHA, 0.0)
    b = update_sgnmf(adj, X, Y, ALPHA, 0.0, unsplit_laplacian=True)
    np.testing.assert_array_equal(a.Y, b.Y)
    c = update_sgnmf(adj, X, Y, ALPHA, 5.0, unsplit_laplacian=True)
    assert not np.allclose(c.Y, update_sgnmf(adj, X, Y, ALPHA, 5.0).Y)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(list(Variant)))
def test_nonnegativity_preserved(seed, variant):
    rng = np.random.default_rng(seed)
    adj = random_graph(rng, int(rng.integers(3, 30)), 0.3)
    cfg = SolverConfig(variant=variant, k=int(rng.integers(1, 4)), seed=seed, max_iters=30, tol=1e-12)
    seen = []
    solve(adj, cfg, callback=lambda t, X, Y, obj: seen.append(min(X.min(), Y.min())))
    assert seen and min(seen) >= 0


# -- solver ------------------------------------------------------------------

def test_solve_two_cycle_monotone():
    _, trace = solve(two_cycle(), SolverConfig(k=1))
    obj = np.array(trace.objective)
    assert np.all(np.diff(obj) <= 1e-9 * np.abs(obj[:-1]))
    assert len(trace.objective) == trace.iters_run + 1


def test_solve_infinite_tol_stops_after_one_iteration(rng):
    adj = random_graph(rng, 10, 0.4)
    _, trace = solve(adj, SolverConfig(k=2, tol=math.inf))
    assert trace.iters_run == 1 and trace.terminated_by == "tolerance"
    assert len(trace.objective) == 2


def test_solve_hits_max_iters(rng):
    adj = random_graph(rng, 10, 0.4)
    _, trace = solve(adj, SolverConfig(k=2, tol=1e-300, max_iters=5))
    assert trace.iters_run == 5 and trace.terminated_by == "max_iters"


def test_solve_relative_tol(rng):
    adj = random_graph(rng, 20, 0.3)
    _, a = solve(adj, SolverConfig(k=2, tol=1e-3, relative_tol=True, max_iters=1000))
    obj = a.objective
    assert abs(obj[-1] - obj[-2]) / abs(obj[-2]) < 1e-3
    assert abs(obj[-2] - obj[-3]) / abs(obj[-3]) >= 1e-3


@pytest.mark.parametrize("seed", range(20))
def test_sgnmf_monotone_descent(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(10, 80))
    k = int(rng.integers(2, 5))
    adj, _ = make_planted_partition(n, k, 0.4, 0.05, seed)
    cfg = SolverConfig(k=k, seed=seed, alpha=float(rng.choice([0, ALPHA, 1])),
                       lam=float(rng.choice([0, 1, 100])), tol=1e-8, max_iters=300)
    _, trace = solve(adj, cfg)
    obj = np.array(trace.objective)
    assert np.all(np.diff(obj) <= 1e-9 * np.abs(obj[:-1]))


def test_solve_deterministic(rng):
    adj = random_graph(rng, 25, 0.2)
    cfg = SolverConfig(k=3, seed=11)
    (f1, t1), (f2, t2) = solve(adj, cfg), solve(adj, cfg)
    assert t1 == t2
    np.testing.assert_array_equal(f1.Y, f2.Y)


@pytest.mark.parametrize("variant", ["snmf", "snmf-adj"])
def test_symmetric_variants_mirror_factor(variant, rng):
    adj = random_graph(rng, 12, 0.4)
    f, trace = solve(adj, SolverConfig(variant=variant, k=2))
    np.testing.assert_array_equal(f.X, f.Y)
    assert f.X is not f.Y
    assert trace.objective[-1] == pytest.approx(np.linalg.norm(f.X @ f.X.T - adj.matrix.toarray()) ** 2)


def test_nmf_objective_is_unscaled_loss(rng):
    adj = random_graph(rng, 8, 0.5)
    X, Y = rng.random((2, 8, 2))
    want = np.linalg.norm(X @ Y.T - adj.matrix.toarray()) ** 2
    assert objective(adj, X, Y, SolverConfig(variant="nmf")) == pytest.approx(want, rel=1e-12)


def test_non_finite_objective_aborts(rng):
    adj = random_graph(rng, 6, 0.5)
    huge = np.full((6, 2), 1e200)
    with pytest.raises(NumericalError) as info, np.errstate(all="ignore"):
        solve(adj, SolverConfig(k=2), init=FactorPair(huge, huge))
    assert info.value.iteration == 0
    assert not np.isfinite(info.value.value)


def test_k_larger_than_n_rejected():
    with pytest.raises(ValueError, match="exceeds"):
        solve(two_cycle(), SolverConfig(k=3))


@pytest.mark.parametrize("kwargs", [{"k": 0}, {"alpha": -1}, {"lam": -1}, {"tol": 0}, {"init_scale": 0},
                                    {"variant": "pca"}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)


def test_kkt_residual_zero_at_stationary_point():
    a = np.full((2, 1), HALF_ROOT)
    assert kkt_residual(two_cycle(), a, a, SolverConfig(k=1)) < 1e-15
    assert kkt_residual(two_cycle(), a, a, SolverConfig(variant="snmf", k=1)) < 1e-15


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_kkt_residual_shrinks_with_tolerance(seed):
    adj, _ = make_planted_partition(20, 2, 0.6, 0.1, seed)
    loose = solve(adj, SolverConfig(k=2, seed=seed, tol=1e-10, max_iters=100_000))[1].kkt_residual
    tight = solve(adj, SolverConfig(k=2, seed=seed, tol=1e-14, max_iters=100_000))[1].kkt_residual
    assert tight < loose / 5
    assert tight < 1e-6
