"""Brute-force evidence computations used as independent ground truth.

``quadrature_log_integral`` integrates ``exp(-psi)`` on a tensor trapezoid grid
in log domain. ``orthant_log_probability`` gives the first-orthant mass of a
multivariate normal, by adaptive quadrature on the conditional factorization
for ``d <= 3`` or by the GHK sequential importance sampler otherwise.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from . import numkit
from .rng import RngStream

REFINE_TOL = 1e-5
_MAX_BATCH = 1_000_000


class QuadratureAccuracyWarning(UserWarning):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    nodes: int = 200

    def __post_init__(self):
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ValueError("lower and upper must have the same non-zero length")
        if not all(np.isfinite(self.lower)) or not all(np.isfinite(self.upper)):
            raise ValueError("quadrature intervals must be finite")
        if any(a >= b for a, b in zip(self.lower, self.upper)):
            raise ValueError("each interval needs lower < upper")
        if self.nodes < 16:
            raise ValueError("need at least 16 nodes per axis")

    @property
    def dim(self) -> int:
        return len(self.lower)


def _trapezoid_log(psi, lower, upper, nodes: int) -> float:
    d = len(lower)
    axes = [np.linspace(a, b, nodes) for a, b in zip(lower, upper)]
    logw = []
    for ax in axes:
        h = ax[1] - ax[0]
        w = np.full(nodes, h)
        w[[0, -1]] *= 0.5
        logw.append(np.log(w))
    # iterate over slabs of the leading axes so each psi call stays bounded
    inner = int(np.prod([nodes] * (d - 1))) if d > 1 else 1
    slab = max(1, _MAX_BATCH // inner)
    rest_grid = np.stack(np.meshgrid(*axes[1:], indexing="ij"), -1).reshape(-1, d - 1) if d > 1 else None
    rest_logw = (np.sum(np.stack(np.meshgrid(*logw[1:], indexing="ij"), -1), -1).ravel()
                 if d > 1 else np.zeros(1))
    parts = []
    for start in range(0, nodes, slab):
        first = axes[0][start:start + slab]
        if d == 1:
            pts = first[:, None]
            lw = logw[0][start:start + slab]
        else:
            pts = np.concatenate([np.repeat(first, inner)[:, None],
                                  np.tile(rest_grid, (first.size, 1))], axis=1)
            lw = (logw[0][start:start + slab][:, None] + rest_logw[None, :]).ravel()
        vals = np.asarray(psi(pts), dtype=float).ravel()
        if not np.all(np.isfinite(vals)):
            raise ValueError("psi is not finite on the quadrature grid")
        parts.append(numkit.log_sum_exp(lw - vals))
    return numkit.log_sum_exp(parts)


def quadrature_log_integral(psi, spec: QuadratureSpec) -> float:
    """``log`` of the integral of ``exp(-psi)`` over the box in ``spec``.

    The grid is refined once (``2 * nodes - 1`` nodes per axis, nested); the
    refined value is returned and a :class:`QuadratureAccuracyWarning` is
    issued when refinement moves the result by ``1e-5`` or more.
    """
    if spec.dim > 3:
        raise ValueError("tensor quadrature is limited to d <= 3")
    coarse = _trapezoid_log(psi, spec.lower, spec.upper, spec.nodes)
    fine = _trapezoid_log(psi, spec.lower, spec.upper, 2 * spec.nodes - 1)
    if not abs(fine - coarse) < REFINE_TOL:
        warnings.warn(f"quadrature refinement changed the result by {abs(fine - coarse):.3g}",
                      QuadratureAccuracyWarning, stacklevel=2)
    return fine


def posterior_box(samples, width: float = 10.0, positive=None, floor: float = 1e-8):
    """Mean +/- ``width`` standard deviations per axis, clipped above ``floor`` on positive axes."""
    s = np.atleast_2d(np.asarray(samples, dtype=float))
    m, sd = s.mean(axis=0), s.std(axis=0, ddof=1)
    lo, hi = m - width * sd, m + width * sd
    if positive is not None:
        pos = np.asarray(positive, dtype=bool)
        lo = np.where(pos, np.maximum(lo, floor * np.maximum(m, 1.0)), lo)
    return tuple(lo.tolist()), tuple(hi.tolist())


# --------------------------------------------------------------------------
# orthant probabilities

def _orthant_quadrature(mean: np.ndarray, cov: np.ndarray) -> float:
    d = mean.size
    if d == 1:
        return float(special.log_ndtr(mean[0] / math.sqrt(cov[0, 0])))
    s1 = math.sqrt(cov[0, 0])
    if d == 2:
        # P = int_{x1 > 0} phi(x1) Phi(E[x2|x1] / sd(x2|x1)) dx1, in z = (x1 - m1)/s1
        b = cov[1, 0] / cov[0, 0]
        sd2 = math.sqrt(cov[1, 1] - b * cov[0, 1])

        def f(z):
            x1 = mean[0] + s1 * z
            return math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi) * special.ndtr((mean[1] + b * (x1 - mean[0])) / sd2)

        val, _ = integrate.quad(f, -mean[0] / s1, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
        return math.log(val)
    # d == 3: condition the third coordinate on the first two
    c12 = cov[:2, :2]
    c12_inv = np.linalg.inv(c12)
    reg = cov[2, :2] @ c12_inv
    sd3 = math.sqrt(cov[2, 2] - reg @ cov[:2, 2])
    L = numkit.cholesky(c12)
    log_norm = -math.log(2 * math.pi) - numkit.log_det_from_chol(L) / 2

    def f(x2, x1):
        x = np.array([x1, x2]) - mean[:2]
        q = x @ c12_inv @ x
        return math.exp(log_norm - 0.5 * q) * special.ndtr((mean[2] + reg @ x) / sd3)

    hi1 = mean[0] + 40 * s1
    hi2 = mean[1] + 40 * math.sqrt(cov[1, 1])
    val, _ = integrate.dblquad(f, 0.0, max(hi1, 1e-12), 0.0, max(hi2, 1e-12),
                               epsabs=0.0, epsrel=1e-10)
    return math.log(val)


def _orthant_ghk(mean: np.ndarray, cov: np.ndarray, count: int, rng: RngStream) -> tuple[float, float]:
    L = numkit.cholesky(cov)
    d = mean.size
    z = np.zeros((count, d))
    logw = np.zeros(count)
    for i in range(d):
        # x_i = m_i + sum_{j<i} L_ij z_j + L_ii z_i > 0  <=>  z_i > a_i
        a = -(mean[i] + z[:, :i] @ L[i, :i]) / L[i, i]
        log_tail = special.log_ndtr(-a)
        logw += log_tail
        u = rng.uniform(size=count)
        z[:, i] = -special.ndtri_exp(np.log(u) + log_tail)
    log_p = numkit.log_mean_exp(logw)
    w = np.exp(logw - log_p)
    se = float(np.std(w, ddof=1) / math.sqrt(count))
    return log_p, se


def orthant_log_probability(mean, cov, method: str = "quadrature", count: int = 100_000,
                            rng: RngStream | None = None) -> tuple[float, float]:
    """``log P(X > 0)`` for ``X ~ N(mean, cov)`` and its log-scale standard error.

    ``method="quadrature"`` (``d <= 3``) returns a standard error of 0;
    ``method="monte_carlo"`` uses the GHK simulator with a delta-method
    standard error.
    """
    mean = np.asarray(mean, dtype=float).ravel()
    cov = numkit.symmetrize(np.atleast_2d(cov))
    if cov.shape != (mean.size, mean.size):
        raise ValueError("mean and covariance dimensions disagree")
    numkit.cholesky(cov)
    if method == "quadrature":
        if mean.size > 3:
            raise ValueError("quadrature orthant probability is limited to d <= 3")
        return _orthant_quadrature(mean, cov), 0.0
    if method == "monte_carlo":
        if rng is None:
            raise ValueError("monte_carlo orthant probability needs an rng")
        return _orthant_ghk(mean, cov, count, rng)
    raise ValueError(f"unknown method {method!r}")
