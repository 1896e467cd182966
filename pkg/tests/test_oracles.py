import math

import numpy as np
import pytest
from scipy import stats

from hybridml.oracles import (QuadratureAccuracyWarning, QuadratureSpec, orthant_log_probability,
                              quadrature_log_integral)
from hybridml.rng import RngStream


def test_unit_mass():
    assert quadrature_log_integral(lambda u: np.zeros(len(u)), QuadratureSpec((0.0, 0.0), (1.0, 1.0))) == \
        pytest.approx(0.0, abs=1e-14)


def test_standard_normal_mass():
    psi = lambda u: 0.5 * u[:, 0] ** 2 + 0.5 * math.log(2 * math.pi)
    assert quadrature_log_integral(psi, QuadratureSpec((-10.0,), (10.0,))) == pytest.approx(0.0, abs=1e-8)


def test_three_dimensional_gaussian_mass():
    cov = np.array([[1.0, 0.3, 0.0], [0.3, 2.0, 0.4], [0.0, 0.4, 0.5]])
    dist = stats.multivariate_normal(np.zeros(3), cov)
    sd = np.sqrt(np.diag(cov))
    spec = QuadratureSpec(tuple(-10 * sd), tuple(10 * sd), 60)
    assert quadrature_log_integral(lambda u: -dist.logpdf(u), spec) == pytest.approx(0.0, abs=1e-6)


def test_huge_psi_offsets_are_exact_shifts():
    psi = lambda u: 0.5 * u[:, 0] ** 2 + 650.0
    assert quadrature_log_integral(psi, QuadratureSpec((-10.0,), (10.0,))) == \
        pytest.approx(0.5 * math.log(2 * math.pi) - 650.0, abs=1e-8)


def test_coarse_grid_warns():
    # exp(-u) on [0, 3]: the integrand is cut at both ends, error is second order in h
    with pytest.warns(QuadratureAccuracyWarning):
        quadrature_log_integral(lambda u: u[:, 0], QuadratureSpec((0.0,), (3.0,), 16))


def test_quadrature_errors():
    with pytest.raises(ValueError):
        quadrature_log_integral(lambda u: np.zeros(len(u)), QuadratureSpec((0,) * 4, (1,) * 4, 16))
    with pytest.raises(ValueError, match="not finite"):
        quadrature_log_integral(lambda u: np.full(len(u), np.nan), QuadratureSpec((0.0,), (1.0,)))
    with pytest.raises(ValueError):
        QuadratureSpec((0.0,), (1.0,), 8)
    with pytest.raises(ValueError):
        QuadratureSpec((0.0,), (np.inf,))


def test_orthant_examples():
    assert orthant_log_probability([0.0], [[1.0]])[0] == pytest.approx(math.log(0.5), abs=1e-15)
    assert orthant_log_probability([0.0, 0.0], np.diag([1.0, 4.0]))[0] == pytest.approx(math.log(0.25), abs=1e-12)


@pytest.mark.parametrize("rho", [-0.9, -0.5, 0.0, 0.5, 0.95])
def test_orthant_arcsine_formula(rho):
    log_p, se = orthant_log_probability([0.0, 0.0], [[1.0, rho], [rho, 1.0]])
    assert math.exp(log_p) == pytest.approx(0.25 + math.asin(rho) / (2 * math.pi), abs=1e-6)
    assert se == 0.0


def test_orthant_three_dimensions_against_scipy():
    mean = np.array([0.4, -0.2, 1.0])
    cov = np.array([[1.0, 0.3, -0.2], [0.3, 2.0, 0.5], [-0.2, 0.5, 1.5]])
    # P(X > 0) = P(-X < 0)
    ref = stats.multivariate_normal.cdf(np.zeros(3), mean=-mean, cov=cov, abseps=1e-10, releps=1e-10)
    assert orthant_log_probability(mean, cov)[0] == pytest.approx(math.log(ref), abs=1e-5)


def test_monte_carlo_agrees_with_quadrature():
    mean = np.array([-0.5, 0.3])
    cov = np.array([[1.0, 0.6], [0.6, 2.0]])
    exact, _ = orthant_log_probability(mean, cov)
    for seed in range(5):
        est, se = orthant_log_probability(mean, cov, "monte_carlo", count=50_000, rng=RngStream(seed))
        assert abs(est - exact) < 3 * se


def test_monte_carlo_far_tail():
    # mean far outside the orthant: naive sampling would see no hits
    mean = np.array([-6.0, -6.0])
    exact, _ = orthant_log_probability(mean, np.eye(2))
    est, se = orthant_log_probability(mean, np.eye(2), "monte_carlo", count=10_000, rng=RngStream(1))
    assert exact == pytest.approx(2 * stats.norm.logsf(6.0), abs=1e-8)
    assert abs(est - exact) < max(3 * se, 1e-10)


def test_orthant_errors():
    with pytest.raises(ValueError):
        orthant_log_probability(np.zeros(4), np.eye(4))
    with pytest.raises(ValueError):
        orthant_log_probability([0.0, 0.0], np.eye(2), "monte_carlo")
    with pytest.raises(np.linalg.LinAlgError):
        orthant_log_probability([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])
