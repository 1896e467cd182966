"""Random variate generators for the model zoo.

Inverse-Wishart uses the standard parametrization ``IW(scale, dof)`` with
density proportional to ``|S|^{-(dof+d+1)/2} etr(-scale S^{-1}/2)`` and mean
``scale / (dof - d - 1)``. The hyper-inverse-Wishart sampler takes the
clique-marginal parameter ``delta``: each clique block ``Sigma_C`` is
``IW(scale_C, delta + |C| - 1)``. On the complete graph this is
``IW(scale, delta + d - 1)``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

from . import numkit
from .graph import DecomposableGraph
from .rng import RngStream

TAIL_SWITCH = 4.0


def sample_mvn(rng: RngStream, mean, cov_chol, size: int | None = None) -> np.ndarray:
    """``mean + L z`` with ``z`` standard normal; ``size`` adds a leading axis."""
    mean = np.asarray(mean, dtype=float)
    L = np.asarray(cov_chol, dtype=float)
    if L.shape != (mean.size, mean.size):
        raise ValueError("mean and Cholesky factor dimensions disagree")
    if np.any(np.diagonal(L) <= 0):
        raise ValueError("Cholesky factor must have a positive diagonal")
    if size is None:
        return mean + L @ rng.standard_normal(mean.size)
    z = rng.standard_normal((size, mean.size))
    return mean + z @ L.T


def sample_inverse_gamma(rng: RngStream, shape: float, rate: float, size=None):
    """Draw(s) with density proportional to ``x^{-shape-1} exp(-rate/x)``."""
    if shape <= 0 or rate <= 0:
        raise ValueError("inverse-gamma parameters must be positive")
    return rate / rng.gamma(shape, 1.0, size)


def _bartlett_factor(rng: RngStream, d: int, dof: float) -> np.ndarray:
    a = np.zeros((d, d))
    a[np.diag_indices(d)] = np.sqrt(rng.chisquare(dof - np.arange(d)))
    low = np.tril_indices(d, -1)
    a[low] = rng.standard_normal(len(low[0]))
    return a


def sample_wishart_chol(rng: RngStream, scale_chol, dof: float) -> np.ndarray:
    """Lower factor ``M`` with ``M M^T ~ Wishart(dof, L L^T)``."""
    L = np.asarray(scale_chol, dtype=float)
    d = L.shape[0]
    if dof <= d - 1:
        raise ValueError(f"Wishart dof must exceed d - 1 = {d - 1}, got {dof}")
    return L @ _bartlett_factor(rng, d, dof)


def sample_inverse_wishart(rng: RngStream, scale, dof: float) -> np.ndarray:
    """One draw from ``IW(scale, dof)`` via Bartlett on the Wishart of ``scale^{-1}``."""
    scale = numkit.symmetrize(scale)
    d = scale.shape[0]
    if dof <= d - 1:
        raise ValueError(f"inverse-Wishart dof must exceed d - 1 = {d - 1}, got {dof}")
    prec_chol = numkit.cholesky(np.linalg.inv(scale))
    m = sample_wishart_chol(rng, prec_chol, dof)
    m_inv = numkit.solve_triangular(m, np.eye(d))
    sigma = m_inv.T @ m_inv
    return 0.5 * (sigma + sigma.T)


def _std_truncnorm(rng: RngStream, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Standard normal restricted to ``(a, b)``, elementwise."""
    out = np.empty(a.shape)
    flip = a >= 0  # reflect right-side intervals to the left for accuracy
    lo = np.where(flip, -b, a)
    hi = np.where(flip, -a, b)
    # now lo < hi and lo <= 0 or the interval sits in the left tail
    far = hi < -TAIL_SWITCH
    near = ~far
    if np.any(near):
        l, h = lo[near], hi[near]
        pl, ph = special.ndtr(l), special.ndtr(h)
        u = rng.uniform(size=l.shape)
        x = special.ndtri(pl + u * (ph - pl))
        out[near] = np.clip(x, l, h)
    if np.any(far):
        idx = np.flatnonzero(far)
        # left-tail interval (lo, hi), hi < -4: mirror to (-hi, -lo) right tail
        for k in idx:
            out[k] = -_right_tail(rng, -hi[k], -lo[k])
    return np.where(flip, -out, out)


def _right_tail(rng: RngStream, a: float, b: float) -> float:
    """Exponential-tilt rejection for the standard normal on ``(a, b)``, ``a > 4``."""
    if b - a < 1.0 / a:
        # narrow interval: uniform proposal, acceptance >= exp(-1)
        while True:
            x = rng.uniform(a, b)
            if math.log(rng.uniform()) <= -0.5 * (x * x - a * a):
                return x
    lam = 0.5 * (a + math.sqrt(a * a + 4.0))
    while True:
        x = a + rng.exponential(1.0 / lam)
        if x >= b:
            continue
        if math.log(rng.uniform()) <= -0.5 * (x - lam) ** 2:
            return x


def sample_truncated_normal_scalar(rng: RngStream, mu, sigma, lower, upper, size=None):
    """``N(mu, sigma^2)`` conditioned on ``(lower, upper)``.

    Inverse-CDF in the central region, exponential-tilt rejection when the
    standardized interval lies beyond 4 standard deviations.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if not lower < upper:
        raise ValueError(f"empty truncation interval ({lower}, {upper})")
    shape = () if size is None else (size,) if np.isscalar(size) else tuple(size)
    a = np.full(shape, (lower - mu) / sigma, dtype=float)
    b = np.full(shape, (upper - mu) / sigma, dtype=float)
    x = mu + sigma * _std_truncnorm(rng, a, b)
    return float(x) if size is None else x


def gibbs_truncated_mvn(rng: RngStream, mean, precision, count: int,
                        burn_in: int = 500, thin: int = 5, start=None) -> np.ndarray:
    """Coordinate-wise Gibbs draws from ``N(mean, precision^{-1})`` on the open first orthant."""
    mean = np.asarray(mean, dtype=float)
    Q = numkit.symmetrize(precision)
    numkit.cholesky(Q)  # SPD check
    d = mean.size
    if count < 1 or thin < 1 or burn_in < 0:
        raise ValueError("count, thin must be >= 1 and burn_in >= 0")
    cond_sd = 1.0 / np.sqrt(np.diag(Q))
    if start is None:
        x = np.maximum(mean, cond_sd)
    else:
        x = np.array(start, dtype=float)
        if np.any(x <= 0):
            raise ValueError("start must lie in the open first orthant")
    offdiag = Q - np.diag(np.diag(Q))
    out = np.empty((count, d))
    total = burn_in + count * thin
    kept = 0
    tiny = np.nextafter(0.0, 1.0)
    ndtr, ndtri = special.ndtr, special.ndtri
    for sweep in range(1, total + 1):
        u = rng.uniform(size=d)
        for i in range(d):
            cm = mean[i] - offdiag[i] @ (x - mean) / Q[i, i]
            a = -cm / cond_sd[i]
            # standard normal on (a, inf): inverse CDF of the upper tail, rejection beyond the switch
            z = -ndtri(u[i] * ndtr(-a)) if a <= TAIL_SWITCH else _right_tail(rng, a, math.inf)
            x[i] = max(cm + cond_sd[i] * max(z, a), tiny)
        if sweep > burn_in and (sweep - burn_in) % thin == 0:
            out[kept] = x
            kept += 1
    return out


def sample_hiw(rng: RngStream, graph: DecomposableGraph, delta: float, scale) -> np.ndarray:
    """Draw ``Sigma ~ HIW_G(delta, scale)`` by clique-sequential construction.

    The first clique block is inverse-Wishart; each later clique samples the
    Schur complement of its separator and the regression on the separator,
    then the remaining entries are filled by the completion whose inverse
    vanishes off the graph.
    """
    B = numkit.symmetrize(scale)
    d = graph.d
    if B.shape != (d, d):
        raise ValueError("scale matrix dimension does not match the graph")
    if delta <= 0:
        raise ValueError("delta must be positive")
    numkit.cholesky(B)
    sigma = np.zeros((d, d))
    placed: list[int] = []
    for C, S in zip(graph.cliques, graph.separators):
        C = list(C)
        S = list(S)
        R = [v for v in C if v not in S]
        dof = delta + len(C) - 1
        if not S:
            sigma[np.ix_(R, R)] = sample_inverse_wishart(rng, B[np.ix_(R, R)], dof)
            placed.extend(R)
            continue
        B_ss = B[np.ix_(S, S)]
        B_sr = B[np.ix_(S, R)]
        B_ss_inv = np.linalg.inv(B_ss)
        B_r_s = B[np.ix_(R, R)] - B_sr.T @ B_ss_inv @ B_sr
        sig_r_s = sample_inverse_wishart(rng, B_r_s, dof)
        # Sigma_SS^{-1} Sigma_SR | Sigma_{R.S} ~ MN(B_SS^{-1} B_SR, B_SS^{-1}, Sigma_{R.S})
        row_chol = numkit.cholesky(B_ss_inv)
        col_chol = numkit.cholesky(sig_r_s)
        z = rng.standard_normal((len(S), len(R)))
        M = B_ss_inv @ B_sr + row_chol @ z @ col_chol.T
        sig_ss = sigma[np.ix_(S, S)]
        sig_sr = sig_ss @ M
        sigma[np.ix_(S, R)] = sig_sr
        sigma[np.ix_(R, S)] = sig_sr.T
        sigma[np.ix_(R, R)] = sig_r_s + M.T @ sig_ss @ M
        rest = [v for v in placed if v not in S]
        if rest:
            cross = M.T @ sigma[np.ix_(S, rest)]
            sigma[np.ix_(R, rest)] = cross
            sigma[np.ix_(rest, R)] = cross.T
        placed.extend(R)
    return 0.5 * (sigma + sigma.T)
