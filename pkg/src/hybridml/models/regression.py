"""Linear regression ``y = X beta + eps`` under two prior families.

* :class:`MvnIgRegression`: ``beta | s2 ~ N(mu_beta, s2 V_beta)``,
  ``s2 ~ IG(a0, b0)``; ``u = (beta, s2)``.
* :class:`TruncatedMvnRegression`: known ``s2``,
  ``beta ~ N(0, s2/lam I)`` restricted to the first orthant; ``u = beta``.

Design matrices are iid standard normal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .. import numkit
from ..distributions import gibbs_truncated_mvn, sample_inverse_gamma
from ..oracles import orthant_log_probability
from ..rng import RngStream
from ._densities import LOG_2PI, log_inverse_gamma
from .base import Model, Support, Truth


@dataclass
class RegressionData:
    X: np.ndarray
    y: np.ndarray
    beta_true: np.ndarray | None = None
    sigma2_true: float | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float).reshape(len(self.y), -1)
        self.y = np.asarray(self.y, dtype=float).ravel()
        if self.y.size < 1:
            raise ValueError("need at least one observation")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise ValueError("X and y must be finite")


def _simulate(rng: RngStream, n: int, d: int, beta_true, sigma2_true: float, beta_range) -> RegressionData:
    if beta_true is None:
        beta_true = rng.uniform(beta_range[0], beta_range[1], size=d)
    beta_true = np.asarray(beta_true, dtype=float).ravel()
    if beta_true.size != d:
        raise ValueError("beta_true has the wrong length")
    X = rng.standard_normal((n, d))
    y = X @ beta_true + math.sqrt(sigma2_true) * rng.standard_normal(n)
    return RegressionData(X, y, beta_true, sigma2_true)


def _sq_resid(X, y, beta):
    r = y[None, :] - beta @ X.T
    return np.einsum("mi,mi->m", r, r)


class MvnIgRegression(Model):
    name = "mvn_ig_regression"
    has_posterior_density = True

    def __init__(self, data: RegressionData, mu_beta=None, V_beta=None, a0: float = 1.0, b0: float = 1.0):
        X, y = data.X, data.y
        n, d = X.shape
        if a0 <= 0 or b0 <= 0:
            raise ValueError("a0 and b0 must be positive")
        self.data = data
        self.n, self.p = n, d
        self.dim = d + 1
        self.support = Support("positive-scale", np.r_[np.zeros(d, bool), True])
        self.mu_beta = np.zeros(d) if mu_beta is None else np.asarray(mu_beta, dtype=float).ravel()
        self.V_beta = np.eye(d) if V_beta is None else numkit.symmetrize(np.atleast_2d(V_beta))
        self.a0, self.b0 = float(a0), float(b0)

        self.V_beta_chol = numkit.cholesky(self.V_beta) if d else np.zeros((0, 0))
        V_beta_inv = np.linalg.inv(self.V_beta) if d else np.zeros((0, 0))
        self.V_beta_inv = V_beta_inv
        prec_n = X.T @ X + V_beta_inv
        prec_chol = numkit.cholesky(prec_n) if d else np.zeros((0, 0))
        self.V_n = np.linalg.inv(prec_n) if d else np.zeros((0, 0))
        self.V_n = 0.5 * (self.V_n + self.V_n.T)
        self.mu_n = self.V_n @ (X.T @ y + V_beta_inv @ self.mu_beta)
        self.a_n = self.a0 + n / 2
        quad = float(y @ y + self.mu_beta @ V_beta_inv @ self.mu_beta - self.mu_n @ prec_n @ self.mu_n)
        self.b_n = self.b0 + 0.5 * quad
        self.logdet_V_beta = numkit.log_det_from_chol(self.V_beta_chol) if d else 0.0
        self.logdet_V_n = -numkit.log_det_from_chol(prec_chol) if d else 0.0
        self.V_n_chol = numkit.cholesky(self.V_n) if d else np.zeros((0, 0))

    @property
    def posterior_mean(self) -> np.ndarray:
        return np.r_[self.mu_n, self.b_n / (self.a_n - 1)]

    def _log_lik(self, u):
        beta, s2 = u[:, :-1], u[:, -1]
        rss = _sq_resid(self.data.X, self.data.y, beta)
        return -0.5 * self.n * (LOG_2PI + np.log(s2)) - rss / (2 * s2)

    def _log_gauss_block(self, beta, s2, mean, cov_chol, logdet_cov):
        if self.p == 0:
            return np.zeros(beta.shape[0])
        z = numkit.solve_triangular(cov_chol, (beta - mean).T)
        quad = np.einsum("im,im->m", z, z)
        return -0.5 * (self.p * (LOG_2PI + np.log(s2)) + logdet_cov + quad / s2)

    def _log_prior(self, u):
        beta, s2 = u[:, :-1], u[:, -1]
        return (self._log_gauss_block(beta, s2, self.mu_beta, self.V_beta_chol, self.logdet_V_beta)
                + log_inverse_gamma(s2, self.a0, self.b0))

    def log_posterior_density(self, u):
        u = np.asarray(u, dtype=float)
        uu = u.reshape(-1, self.dim)
        beta, s2 = uu[:, :-1], uu[:, -1]
        out = (self._log_gauss_block(beta, s2, self.mu_n, self.V_n_chol, self.logdet_V_n)
               + log_inverse_gamma(s2, self.a_n, self.b_n))
        return float(out[0]) if u.ndim == 1 else out

    def truth(self, rng=None) -> Truth:
        val = (-0.5 * self.n * LOG_2PI + self.a0 * math.log(self.b0) - self.a_n * math.log(self.b_n)
               + gammaln(self.a_n) - gammaln(self.a0) + 0.5 * (self.logdet_V_n - self.logdet_V_beta))
        return Truth(float(val))

    def sample_posterior(self, rng: RngStream, count: int) -> np.ndarray:
        s2 = sample_inverse_gamma(rng, self.a_n, self.b_n, size=count)
        z = rng.standard_normal((count, self.p))
        beta = self.mu_n + np.sqrt(s2)[:, None] * (z @ self.V_n_chol.T)
        return np.column_stack([beta, s2])


class MeanFieldMvnIg(MvnIgRegression):
    """Same target as the base model, sampled from a block-diagonal mean-field approximation.

    ``q(beta)`` is a product of independent normals on consecutive blocks of
    ``block_size`` coefficients, with means and covariance blocks taken from
    ``(mu_n, s2_0 V_n)`` where ``s2_0`` is the posterior mean of ``s2``;
    ``q(s2) = IG(a_n, b_n)`` independently.
    """

    name = "mvn_ig_meanfield"

    def __init__(self, base: MvnIgRegression, block_size: int = 3):
        if base.p % block_size:
            raise ValueError(f"d={base.p} is not divisible by block size {block_size}")
        super().__init__(base.data, base.mu_beta, base.V_beta, base.a0, base.b0)
        self.block_size = block_size
        self.s2_0 = self.b_n / (self.a_n - 1)
        self.blocks = [slice(k, k + block_size) for k in range(0, self.p, block_size)]
        self.block_cov = [self.s2_0 * self.V_n[b, b] for b in self.blocks]
        self.block_chol = [numkit.cholesky(c) for c in self.block_cov]

    def sample_posterior(self, rng: RngStream, count: int) -> np.ndarray:
        s2 = sample_inverse_gamma(rng, self.a_n, self.b_n, size=count)
        beta = np.empty((count, self.p))
        for b, L in zip(self.blocks, self.block_chol):
            beta[:, b] = self.mu_n[b] + rng.standard_normal((count, L.shape[0])) @ L.T
        return np.column_stack([beta, s2])


class TruncatedMvnRegression(Model):
    name = "truncated_mvn_regression"

    def __init__(self, data: RegressionData, sigma2: float = 4.0, lam: float = 0.25,
                 oracle_draws: int = 200_000, burn_in: int = 500, thin: int = 5):
        if sigma2 <= 0 or lam <= 0:
            raise ValueError("sigma2 and lam must be positive")
        X, y = data.X, data.y
        n, d = X.shape
        self.data = data
        self.n, self.p = n, d
        self.dim = d
        self.support = Support("first-orthant", np.ones(d, bool))
        self.sigma2, self.lam = float(sigma2), float(lam)
        self.oracle_draws, self.burn_in, self.thin = oracle_draws, burn_in, thin
        self.Q = (X.T @ X + lam * np.eye(d)) / sigma2
        self.b = X.T @ y / sigma2
        Q_chol = numkit.cholesky(self.Q)
        self.post_mean = numkit.solve_triangular(Q_chol, numkit.solve_triangular(Q_chol, self.b), transposed=True)
        self.post_cov = np.linalg.inv(self.Q)
        self.post_cov = 0.5 * (self.post_cov + self.post_cov.T)
        # log of the constant in front of the orthant mass of N(Q^{-1} b, Q^{-1})
        self.log_const = (d * math.log(2) - 0.5 * n * (LOG_2PI + math.log(sigma2))
                          - 0.5 * d * (LOG_2PI + math.log(sigma2 / lam)) - y @ y / (2 * sigma2)
                          + 0.5 * self.b @ self.post_mean + 0.5 * d * LOG_2PI
                          - 0.5 * numkit.log_det_from_chol(Q_chol))

    def _log_lik(self, u):
        rss = _sq_resid(self.data.X, self.data.y, u)
        return -0.5 * self.n * (LOG_2PI + math.log(self.sigma2)) - rss / (2 * self.sigma2)

    def _log_prior(self, u):
        var = self.sigma2 / self.lam
        return self.p * math.log(2) - 0.5 * self.p * (LOG_2PI + math.log(var)) - np.sum(u * u, axis=1) / (2 * var)

    def truth(self, rng: RngStream | None = None) -> Truth:
        if self.p <= 3:
            log_p, _ = orthant_log_probability(self.post_mean, self.post_cov, "quadrature")
            return Truth(self.log_const + log_p, "quadrature")
        log_p, se = orthant_log_probability(self.post_mean, self.post_cov, "monte_carlo",
                                            count=self.oracle_draws, rng=rng)
        return Truth(self.log_const + log_p, "monte_carlo", se)

    def sample_posterior(self, rng: RngStream, count: int) -> np.ndarray:
        return gibbs_truncated_mvn(rng, self.post_mean, self.Q, count, self.burn_in, self.thin)


def mvn_ig_regression(rng: RngStream, n: int = 100, d: int = 19, mu_beta=None, V_beta=None,
                      a0: float = 1.0, b0: float = 1.0, beta_true=None,
                      sigma2_true: float = 4.0) -> MvnIgRegression:
    data = _simulate(rng, n, d, beta_true, sigma2_true, (-10.0, 10.0))
    return MvnIgRegression(data, mu_beta, V_beta, a0, b0)


def mvn_ig_meanfield(base: MvnIgRegression, block_size: int = 3) -> MeanFieldMvnIg:
    return MeanFieldMvnIg(base, block_size)


def truncated_mvn_regression(rng: RngStream, n: int = 100, d: int = 20, sigma2: float = 4.0,
                             lam: float = 0.25, beta_true=None, **kwargs) -> TruncatedMvnRegression:
    if beta_true is not None and np.any(np.asarray(beta_true) < 0):
        raise ValueError("beta_true must lie in the first orthant")
    data = _simulate(rng, n, d, beta_true, sigma2, (0.0, 1.0))
    return TruncatedMvnRegression(data, sigma2, lam, **kwargs)
