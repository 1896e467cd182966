"""Zero-mean Gaussian covariance models in Cholesky coordinates.

* :class:`IWCovariance`: ``Sigma ~ IW(Lambda, nu)`` with ``Sigma = T T'``;
  ``u`` is the row-major lower triangle of ``T`` (``d(d+1)/2`` values).
* :class:`HIWGraphical`: ``Sigma ~ HIW_G(delta, I)`` for a decomposable ``G``
  with ``Omega = Sigma^{-1} = T T'`` under a perfect elimination order;
  ``u`` holds the ``d`` diagonal entries of ``T`` followed by ``T[j, i]`` for
  every edge ``i < j``.

Inverse-Wishart convention: ``E[Sigma] = Lambda / (nu - d - 1)``.
``HIW_G(delta, B)`` uses Dawid's degrees of freedom, so each clique marginal
is ``IW(B_C, delta + |C| - 1)`` and the complete graph gives
``IW(B, delta + d - 1)``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from .. import numkit
from ..distributions import sample_hiw, sample_inverse_wishart
from ..graph import DecomposableGraph
from ..rng import RngStream
from ._densities import LOG_2PI
from .base import Model, Support, Truth

LOG_2 = math.log(2.0)

DEFAULT_SIGMA = np.array([
    [1.662, 1.640, -1.985, -0.007],
    [1.640, 7.163, -4.146, 5.654],
    [-1.985, -4.146, 4.906, -1.237],
    [-0.007, 5.654, -1.237, 6.779],
])

# 1-based edges of the default 5-vertex graph: a triangle 1-2-3 with a tail 3-4-5
DEFAULT_EDGES = ((1, 2), (1, 3), (2, 3), (3, 4), (4, 5))


def iw_log_density(sigma, scale, dof: float) -> float:
    """Log density of ``IW(scale, dof)`` at ``sigma``."""
    sigma = numkit.symmetrize(sigma)
    scale = numkit.symmetrize(scale)
    d = sigma.shape[0]
    ls = numkit.cholesky(sigma)
    lam = numkit.cholesky(scale)
    z = numkit.solve_triangular(ls, lam)
    return (0.5 * dof * numkit.log_det_from_chol(lam) - 0.5 * dof * d * LOG_2
            - numkit.log_multivariate_gamma(d, dof / 2)
            - 0.5 * (dof + d + 1) * numkit.log_det_from_chol(ls) - 0.5 * float(np.sum(z * z)))


def cholesky_jacobian_log(t_diag) -> float:
    """``log |d Sigma / d T|`` for ``Sigma = T T'``: ``d log 2 + sum_j (d+1-j) log t_jj``."""
    t_diag = np.asarray(t_diag, dtype=float)
    d = t_diag.shape[-1]
    return d * LOG_2 + np.sum(np.arange(d, 0, -1) * np.log(t_diag), axis=-1)


def _simulate_gaussian(rng: RngStream, n: int, cov: np.ndarray) -> np.ndarray:
    L = numkit.cholesky(cov)
    return rng.standard_normal((n, cov.shape[0])) @ L.T


class IWCovariance(Model):
    name = "iw_covariance"
    has_posterior_density = True

    def __init__(self, x, Lambda=None, nu: float = 5.0):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        n, d = x.shape
        self.x = x
        self.data = x
        self.n, self.p = n, d
        self.Lambda = np.eye(d) if Lambda is None else numkit.symmetrize(np.atleast_2d(Lambda))
        if self.Lambda.shape != (d, d):
            raise ValueError("Lambda has the wrong shape")
        if nu <= d - 1:
            raise ValueError(f"nu must exceed d - 1 = {d - 1}")
        self.nu = float(nu)
        self.S = x.T @ x
        self.dim = d * (d + 1) // 2
        self.rows, self.cols = np.tril_indices(d)
        self.diag_pos = np.flatnonzero(self.rows == self.cols)
        mask = np.zeros(self.dim, bool)
        mask[self.diag_pos] = True
        self.support = Support("cholesky-lower-triangular", mask)
        self.lam_chol = numkit.cholesky(self.Lambda)
        self.log_c = (0.5 * self.nu * numkit.log_det_from_chol(self.lam_chol) - 0.5 * self.nu * d * LOG_2
                      - numkit.log_multivariate_gamma(d, self.nu / 2))

    def to_matrix(self, u) -> np.ndarray:
        """``T`` from ``u``; shape ``(d, d)`` or ``(m, d, d)``."""
        u = np.asarray(u, dtype=float)
        T = np.zeros(u.shape[:-1] + (self.p, self.p))
        T[..., self.rows, self.cols] = u
        return T

    def from_matrix(self, T) -> np.ndarray:
        return np.asarray(T)[..., self.rows, self.cols]

    def _trace_inv(self, T, M):
        # tr((T T')^{-1} M) = ||T^{-1} L_M||_F^2 for M = L_M L_M'
        L = np.broadcast_to(numkit.cholesky(M), T.shape)
        z = np.linalg.solve(T, L)
        return np.sum(z * z, axis=(1, 2))

    def _log_lik(self, u):
        T = self.to_matrix(u)
        logdet_t = np.sum(np.log(u[:, self.diag_pos]), axis=1)
        return -0.5 * self.n * self.p * LOG_2PI - self.n * logdet_t - 0.5 * self._trace_inv(T, self.S)

    def _log_prior(self, u):
        T = self.to_matrix(u)
        diag = u[:, self.diag_pos]
        return (self.log_c - (self.nu + self.p + 1) * np.sum(np.log(diag), axis=1)
                - 0.5 * self._trace_inv(T, self.Lambda) + cholesky_jacobian_log(diag))

    def log_posterior_density(self, u):
        u = np.asarray(u, dtype=float)
        uu = u.reshape(-1, self.dim)
        out = np.empty(uu.shape[0])
        for k, row in enumerate(uu):
            T = self.to_matrix(row)
            out[k] = (iw_log_density(T @ T.T, self.Lambda + self.S, self.nu + self.n)
                      + cholesky_jacobian_log(row[self.diag_pos]))
        return float(out[0]) if u.ndim == 1 else out

    def truth(self, rng=None) -> Truth:
        d, n, nu = self.p, self.n, self.nu
        post_chol = numkit.cholesky(self.Lambda + self.S)
        val = (numkit.log_multivariate_gamma(d, (n + nu) / 2) - 0.5 * n * d * math.log(math.pi)
               - numkit.log_multivariate_gamma(d, nu / 2) + 0.5 * nu * numkit.log_det_from_chol(self.lam_chol)
               - 0.5 * (n + nu) * numkit.log_det_from_chol(post_chol))
        return Truth(float(val))

    def sample_posterior(self, rng: RngStream, count: int) -> np.ndarray:
        scale = self.Lambda + self.S
        out = np.empty((count, self.dim))
        for k in range(count):
            out[k] = self.from_matrix(numkit.cholesky(sample_inverse_wishart(rng, scale, self.nu + self.n)))
        return out


class HIWGraphical(Model):
    """Gaussian graphical model with a ``HIW_G(delta, I)`` prior on ``Sigma``.

    Vertices are renumbered so that the graph's perfect elimination order is
    ``0, 1, ..., d-1``; ``perm[k]`` is the original label of internal vertex
    ``k`` and the data columns are permuted to match.
    """

    name = "hiw_graphical"

    def __init__(self, x, graph: DecomposableGraph, delta: float = 3.0, B=None):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        n, d = x.shape
        if graph.d != d:
            raise ValueError("graph size does not match the data dimension")
        if delta <= 0:
            raise ValueError("delta must be positive")
        if B is not None and not np.array_equal(np.asarray(B, dtype=float), np.eye(d)):
            raise ValueError("the induced Cholesky prior is only available for B = I")
        self.perm = np.asarray(graph.order)
        self.graph = graph if graph.is_natural_order() else graph.relabeled()
        self.x = x[:, self.perm]
        self.data = self.x
        self.n, self.p = n, d
        self.delta = float(delta)
        self.B = np.eye(d)
        self.S = self.x.T @ self.x
        self.dim = d + self.graph.n_edges
        self.edge_rows = np.array([j for _, j in self.graph.edges], dtype=int)
        self.edge_cols = np.array([i for i, _ in self.graph.edges], dtype=int)
        mask = np.zeros(self.dim, bool)
        mask[:d] = True
        self.support = Support("cholesky-lower-triangular", mask)
        nu = np.asarray(self.graph.nu, dtype=float)
        a = self.delta + nu
        self._vertex_const = float(np.sum(-0.5 * a * LOG_2 - gammaln(a / 2) + LOG_2))
        self._vertex_pow = a - 1
        self._edge_const = -0.5 * LOG_2PI * self.graph.n_edges

    def to_matrix(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        T = np.zeros(u.shape[:-1] + (self.p, self.p))
        idx = np.arange(self.p)
        T[..., idx, idx] = u[..., :self.p]
        T[..., self.edge_rows, self.edge_cols] = u[..., self.p:]
        return T

    def from_matrix(self, T) -> np.ndarray:
        T = np.asarray(T)
        idx = np.arange(self.p)
        return np.concatenate([T[..., idx, idx], T[..., self.edge_rows, self.edge_cols]], axis=-1)

    def _log_lik(self, u):
        T = self.to_matrix(u)
        ST = np.einsum("ij,mjk->mik", self.S, T)
        tr = np.einsum("mji,mji->m", T, ST)
        return -0.5 * self.n * self.p * LOG_2PI + self.n * np.sum(np.log(u[:, :self.p]), axis=1) - 0.5 * tr

    def _log_prior(self, u):
        diag, off = u[:, :self.p], u[:, self.p:]
        return (self._vertex_const + np.sum(self._vertex_pow * np.log(diag) - 0.5 * diag ** 2, axis=1)
                + self._edge_const - 0.5 * np.sum(off ** 2, axis=1))

    @staticmethod
    def _log_w(D, S_sub, b: float, n: int) -> float:
        c = D.shape[0]
        return (0.5 * (b + c - 1) * numkit.log_det_from_chol(numkit.cholesky(D))
                - 0.5 * (b + n + c - 1) * numkit.log_det_from_chol(numkit.cholesky(D + S_sub))
                + 0.5 * n * c * LOG_2
                - numkit.log_multivariate_gamma(c, (b + c - 1) / 2)
                + numkit.log_multivariate_gamma(c, (b + n + c - 1) / 2))

    def truth(self, rng=None) -> Truth:
        val = -0.5 * self.n * self.p * LOG_2PI
        for C, S in zip(self.graph.cliques, self.graph.separators):
            C = list(C)
            val += self._log_w(self.B[np.ix_(C, C)], self.S[np.ix_(C, C)], self.delta, self.n)
            if S:
                S = list(S)
                val -= self._log_w(self.B[np.ix_(S, S)], self.S[np.ix_(S, S)], self.delta, self.n)
        return Truth(float(val))

    def sample_posterior(self, rng: RngStream, count: int) -> np.ndarray:
        scale = self.B + self.S
        out = np.empty((count, self.dim))
        for k in range(count):
            sigma = sample_hiw(rng, self.graph, self.delta + self.n, scale)
            out[k] = self.from_matrix(numkit.cholesky(np.linalg.inv(sigma)))
        return out


def iw_covariance(rng: RngStream, n: int = 100, d: int = 4, Lambda=None, nu: float = 5.0,
                  Sigma_true=None) -> IWCovariance:
    if Sigma_true is None:
        if d != 4:
            raise ValueError("Sigma_true must be given when d != 4")
        Sigma_true = DEFAULT_SIGMA
    Sigma_true = numkit.symmetrize(np.atleast_2d(Sigma_true))
    if Sigma_true.shape != (d, d):
        raise ValueError("Sigma_true has the wrong shape")
    return IWCovariance(_simulate_gaussian(rng, n, Sigma_true), Lambda, nu)


def default_omega(graph: DecomposableGraph, off_diagonal: float = 0.5) -> np.ndarray:
    """``Omega = T T'`` with unit diagonal ``T`` and ``off_diagonal`` on edges (perfect order labels)."""
    g = graph if graph.is_natural_order() else graph.relabeled()
    T = np.eye(g.d)
    for i, j in g.edges:
        T[j, i] = off_diagonal
    omega = T @ T.T
    # back to the caller's vertex labels
    inv = np.argsort(np.asarray(graph.order))
    return omega[np.ix_(inv, inv)]


def hiw_graphical(rng: RngStream, n: int = 100, graph: DecomposableGraph | None = None,
                  delta: float = 3.0, B=None, Omega_true=None) -> HIWGraphical:
    if graph is None:
        graph = DecomposableGraph(5, tuple((i - 1, j - 1) for i, j in DEFAULT_EDGES))
    if Omega_true is None:
        Omega_true = default_omega(graph)
    Omega_true = numkit.symmetrize(np.atleast_2d(Omega_true))
    x = _simulate_gaussian(rng, n, np.linalg.inv(Omega_true))
    return HIWGraphical(x, graph, delta, B)
