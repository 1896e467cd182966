import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from hybridml import numkit


def test_cholesky_matches_numpy(np_rng):
    a = np_rng.standard_normal((6, 6))
    m = a @ a.T + 6 * np.eye(6)
    assert np.allclose(numkit.cholesky(m), np.linalg.cholesky(m), atol=1e-12)


def test_cholesky_reports_failing_pivot():
    m = np.diag([1.0, 2.0, -1.0, 4.0])
    with pytest.raises(numkit.NotPositiveDefiniteError) as err:
        numkit.cholesky(m)
    assert err.value.pivot == 2


def test_cholesky_rejects_asymmetric():
    with pytest.raises(ValueError, match="symmetric"):
        numkit.cholesky(np.array([[2.0, 1.0], [0.0, 2.0]]))


def test_log_det_and_triangular_solve(np_rng):
    a = np_rng.standard_normal((5, 5))
    m = a @ a.T + np.eye(5)
    L = numkit.cholesky(m)
    assert numkit.log_det_from_chol(L) == pytest.approx(np.linalg.slogdet(m)[1], abs=1e-11)
    b = np_rng.standard_normal(5)
    assert np.allclose(L @ numkit.solve_triangular(L, b), b)
    assert np.allclose(L.T @ numkit.solve_triangular(L, b, transposed=True), b)


def test_log_sum_exp_edge_cases():
    assert numkit.log_sum_exp([-np.inf, -np.inf]) == -math.inf
    assert numkit.log_sum_exp([1000.0, 1000.0]) == pytest.approx(1000 + math.log(2))
    assert numkit.log_sum_exp([-1000.0, -1000.0]) == pytest.approx(-1000 + math.log(2))
    with pytest.raises(ValueError):
        numkit.log_sum_exp([])


@given(st.lists(st.floats(-700, 700), min_size=1, max_size=30))
def test_log_sum_exp_agrees_with_scipy(values):
    assert numkit.log_sum_exp(values) == pytest.approx(special.logsumexp(values), rel=1e-12, abs=1e-12)


@given(st.integers(1, 8), st.floats(0.0, 30.0))
def test_log_multivariate_gamma_against_scipy(d, extra):
    a = (d - 1) / 2 + 0.01 + extra
    assert numkit.log_multivariate_gamma(d, a) == pytest.approx(special.multigammaln(a, d), rel=1e-12)


def test_log_multivariate_gamma_domain():
    with pytest.raises(ValueError):
        numkit.log_multivariate_gamma(3, 1.0)


def _brute_weighted_median(v, w):
    cost = [np.sum(w * np.abs(v - z)) for z in v]
    best = min(cost)
    return min(z for z, c in zip(v, cost) if c <= best * (1 + 1e-12) + 1e-300)


@settings(max_examples=200)
@given(st.lists(st.tuples(st.integers(-20, 20), st.integers(1, 9)), min_size=1, max_size=25))
def test_weighted_median_is_l1_minimizer(pairs):
    v = np.array([p[0] for p in pairs], dtype=float)
    w = np.array([p[1] for p in pairs], dtype=float)
    assert numkit.weighted_median(v, w) == _brute_weighted_median(v, w)


def test_weighted_median_tie_goes_low():
    # equal halves: every z in [1, 2] minimizes; the smallest attained value wins
    assert numkit.weighted_median([1.0, 2.0], [1.0, 1.0]) == 1.0
    assert numkit.weighted_median([5.0], [3.0]) == 5.0


def test_weighted_median_rejects_bad_weights():
    with pytest.raises(ValueError):
        numkit.weighted_median([1.0, 2.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        numkit.weighted_median([1.0, 2.0], [1.0])


def test_weighted_median_heavy_weight_dominates():
    v = np.arange(1.0, 6.0)
    assert numkit.weighted_median(v, [1, 1, 1, 1, 10.0]) == 5.0
    assert numkit.weighted_median(v, [1, 1, 1, 1, 1.0]) == 3.0


def test_hand_examples():
    assert np.allclose(numkit.cholesky(np.eye(3)), np.eye(3))
    assert np.allclose(numkit.cholesky([[4.0, 2.0], [2.0, 3.0]]), [[2.0, 0.0], [1.0, math.sqrt(2)]])
    assert numkit.log_det_from_chol(np.eye(4)) == 0.0
    assert numkit.log_det_from_chol(np.diag([2.0, 3.0])) == pytest.approx(2 * (math.log(2) + math.log(3)))
    assert np.allclose(numkit.solve_triangular([[2.0, 0.0], [1.0, 1.0]], [2.0, 3.0]), [1.0, 2.0])
    assert numkit.log_sum_exp([3.5]) == 3.5
    assert numkit.log_multivariate_gamma(1, 3.0) == pytest.approx(math.log(2))
    assert numkit.log_multivariate_gamma(2, 2.0) == pytest.approx(
        0.5 * math.log(math.pi) + math.lgamma(2) + math.lgamma(1.5))
    assert numkit.weighted_median([1.0, 2.0, 3.0], [1.0, 1.0, 1.0]) == 2.0
    assert numkit.weighted_median([1.0, 100.0], [10.0, 1.0]) == 1.0


def test_solve_triangular_rejects_zero_diagonal():
    with pytest.raises(np.linalg.LinAlgError):
        numkit.solve_triangular([[1.0, 0.0], [1.0, 0.0]], [1.0, 1.0])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 25), st.integers(0, 2**31))
def test_cholesky_reconstructs(d, seed):
    g = np.random.default_rng(seed).standard_normal((d, d))
    a = g @ g.T + d * np.eye(d)
    L = numkit.cholesky(a)
    assert np.allclose(L, np.tril(L)) and np.all(np.diag(L) > 0)
    assert np.linalg.norm(L @ L.T - a) / np.linalg.norm(a) < 1e-10


@given(st.lists(st.floats(-500, 500), min_size=1, max_size=20), st.floats(-300, 300))
def test_log_sum_exp_shift_equivariance(values, shift):
    shifted = numkit.log_sum_exp(np.asarray(values) + shift)
    assert shifted == pytest.approx(numkit.log_sum_exp(values) + shift, abs=1e-12 * max(1.0, abs(shifted)))
