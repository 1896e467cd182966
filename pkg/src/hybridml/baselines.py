"""Competing evidence estimators: harmonic mean, CAME and bridge sampling.

All estimators take the same posterior draws and an unnormalized log
posterior ``log_target(u) = log_lik(u) + log_prior(u)`` (a :class:`Model`
or any vectorized callable) and return log-scale estimates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from . import numkit
from .rng import RngStream

MIN_ESS = 10.0


class BridgeNotConverged(RuntimeError):
    """Bridge iteration hit its cap; ``last_log_z`` holds the final iterate."""

    def __init__(self, last_log_z: float, iterations: int):
        super().__init__(f"bridge sampling did not converge in {iterations} iterations "
                         f"(last log estimate {last_log_z:.6g})")
        self.last_log_z = last_log_z
        self.iterations = iterations


@dataclass(frozen=True)
class EstimatorResult:
    log_z: float
    converged: bool = True
    iterations: int = 0
    ess: float | None = None
    se: float | None = None
    flag: str = ""


@dataclass(frozen=True)
class CameConfig:
    importance_draw_count: int | None = None  # default 10 x number of posterior draws
    alpha: float = 0.005

    def __post_init__(self):
        if not 0.0 < self.alpha < 0.5:
            raise ValueError("alpha must lie in (0, 0.5)")
        if self.importance_draw_count is not None and self.importance_draw_count < 1:
            raise ValueError("importance_draw_count must be >= 1")


@dataclass(frozen=True)
class BridgeConfig:
    max_iterations: int = 500
    tol: float = 1e-8
    proposal_draw_count: int | None = None  # default: number of posterior draws
    warp: bool = False

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


def _log_target_fn(target) -> Callable[[np.ndarray], np.ndarray]:
    if hasattr(target, "log_target"):
        return lambda u: np.asarray(target.log_target(u), dtype=float).ravel()
    if callable(target):
        return lambda u: np.asarray(target(u), dtype=float).ravel()
    raise TypeError("target must be a model or a callable log density")


class GaussianProposal:
    """Normal fitted to draws by moments; diagonal if the covariance is singular."""

    def __init__(self, draws):
        x = np.atleast_2d(np.asarray(draws, dtype=float))
        if x.shape[0] < 2:
            raise ValueError("need at least 2 draws to fit a proposal")
        self.mean = x.mean(axis=0)
        cov = np.atleast_2d(np.cov(x, rowvar=False))
        self.diagonal = False
        try:
            self.chol = numkit.cholesky(cov)
        except np.linalg.LinAlgError:
            var = np.diag(cov)
            if np.any(var <= 0):
                raise ValueError("proposal fit failed: an axis has zero sample variance") from None
            self.chol = np.diag(np.sqrt(var))
            self.diagonal = True
        self.dim = self.mean.size
        self.log_det = numkit.log_det_from_chol(self.chol)

    def sample(self, rng: RngStream, count: int) -> np.ndarray:
        return self.mean + rng.standard_normal((count, self.dim)) @ self.chol.T

    def log_pdf(self, x) -> np.ndarray:
        z = numkit.solve_triangular(self.chol, (np.atleast_2d(x) - self.mean).T)
        return -0.5 * (self.dim * math.log(2 * math.pi) + self.log_det + np.sum(z * z, axis=0))


def harmonic_mean(log_lik_at_samples) -> float:
    """``-log(mean(exp(-l)))`` over posterior log-likelihood values ``l``."""
    ll = np.asarray(log_lik_at_samples, dtype=float).ravel()
    if ll.size == 0:
        raise ValueError("harmonic_mean needs at least one value")
    return -numkit.log_sum_exp(-ll) + math.log(ll.size)


def came(target, samples, rng: RngStream, config: CameConfig = CameConfig()) -> EstimatorResult:
    """Corrected arithmetic mean estimator.

    ``A`` is the per-axis ``[alpha, 1 - alpha]`` quantile box of the draws and
    ``s`` a normal moment-matched to them. The estimate is
    ``log mean(L pi 1_A / s) - log P(A)`` with ``P(A)`` the share of draws
    in ``A``. ``se`` is a log-scale standard error covering both the
    importance average and ``P(A)``. Because ``A`` lies inside the support,
    restricting ``s`` to the support changes nothing once the draw count
    includes rejected draws.
    """
    log_target = _log_target_fn(target)
    x = np.atleast_2d(np.asarray(samples, dtype=float))
    if x.shape[0] < 2:
        raise ValueError("came needs at least 2 posterior draws")
    lo = np.quantile(x, config.alpha, axis=0)
    hi = np.quantile(x, 1.0 - config.alpha, axis=0)
    in_a = np.all((x >= lo) & (x <= hi), axis=1)
    p_a = float(np.mean(in_a))
    if p_a == 0.0:
        raise ValueError("concentration set holds no posterior draws")
    prop = GaussianProposal(x)
    count = config.importance_draw_count or 10 * x.shape[0]
    draws = prop.sample(rng, count)
    hit = np.all((draws >= lo) & (draws <= hi), axis=1)
    logw = np.full(count, -np.inf)
    if np.any(hit):
        logw[hit] = log_target(draws[hit]) - prop.log_pdf(draws[hit])
    if not np.any(np.isfinite(logw)):
        raise ValueError("no importance draw landed in the concentration set")
    log_mean = numkit.log_mean_exp(logw)
    w = np.exp(logw - np.max(logw))
    ess = float(w.sum() ** 2 / np.sum(w * w))
    rel = np.exp(logw - log_mean)
    # delta-method log-scale error: importance average plus the binomial share in A
    se_is = float(np.std(rel, ddof=1) / math.sqrt(count))
    se = math.sqrt(se_is ** 2 + (1.0 - p_a) / (p_a * x.shape[0]))
    flag = "low_ess" if ess < MIN_ESS else ""
    if prop.diagonal:
        flag = ";".join(f for f in (flag, "diagonal_proposal") if f)
    return EstimatorResult(log_mean - math.log(p_a), ess=ess, se=se, flag=flag)


def _bridge_iterate(l1: np.ndarray, l2: np.ndarray, config: BridgeConfig) -> tuple[float, int]:
    # l1: log(target / proposal) at posterior draws, l2: same at proposal draws
    n1, n2 = l1.size, l2.size
    log_s1 = math.log(n1 / (n1 + n2))
    log_s2 = math.log(n2 / (n1 + n2))
    lstar = float(np.median(l1))
    a1, a2 = l1 - lstar, l2 - lstar
    log_r = 0.0
    for it in range(1, config.max_iterations + 1):
        num = special.logsumexp(a2 - np.logaddexp(log_s1 + a2, log_s2 + log_r)) - math.log(n2)
        den = special.logsumexp(-np.logaddexp(log_s1 + a1, log_s2 + log_r)) - math.log(n1)
        new = float(num - den)
        if not math.isfinite(new):
            raise BridgeNotConverged(new + lstar, it)
        if abs(new - log_r) <= config.tol * max(1.0, abs(new + lstar)):
            return new + lstar, it
        log_r = new
    raise BridgeNotConverged(log_r + lstar, config.max_iterations)


def bridge_sampling(target, samples, rng: RngStream, config: BridgeConfig = BridgeConfig()) -> EstimatorResult:
    """Iterative optimal-bridge estimate with a normal proposal.

    Even-indexed draws fit the proposal and odd-indexed draws enter the
    fixed-point iteration. With ``config.warp`` both halves are standardized
    by the fitted mean and Cholesky factor, the target is symmetrized about
    the mean with random sign flips on the iteration half, and the proposal
    becomes the standard normal.

    Raises
    ------
    BridgeNotConverged
        When the iteration cap is reached; the error carries the last iterate.
    """
    log_target = _log_target_fn(target)
    x = np.atleast_2d(np.asarray(samples, dtype=float))
    if x.shape[0] < 4:
        raise ValueError("bridge sampling needs at least 4 posterior draws")
    fit, post = x[0::2], x[1::2]
    prop = GaussianProposal(fit)
    n2 = config.proposal_draw_count or x.shape[0]
    d = x.shape[1]

    if not config.warp:
        draws = prop.sample(rng, n2)
        l1 = log_target(post) - prop.log_pdf(post)
        l2 = log_target(draws) - prop.log_pdf(draws)
    else:
        mu, L = prop.mean, prop.chol
        log_det_l = 0.5 * prop.log_det

        def warped(omega):
            a = log_target(mu + omega @ L.T)
            b = log_target(mu - omega @ L.T)
            return log_det_l + np.logaddexp(a, b) - math.log(2.0)

        def log_std_normal(omega):
            return -0.5 * (d * math.log(2 * math.pi) + np.sum(omega * omega, axis=1))

        omega_post = numkit.solve_triangular(L, (post - mu).T).T
        signs = np.where(rng.uniform(size=post.shape[0]) < 0.5, -1.0, 1.0)
        omega_post *= signs[:, None]
        omega_prop = rng.standard_normal((n2, d))
        l1 = warped(omega_post) - log_std_normal(omega_post)
        l2 = warped(omega_prop) - log_std_normal(omega_prop)

    if not np.all(np.isfinite(l1)):
        raise ValueError("log target is not finite at a posterior draw")
    log_z, iters = _bridge_iterate(l1, l2, config)
    return EstimatorResult(log_z, iterations=iters, flag="diagonal_proposal" if prop.diagonal else "")


def warp_bridge_sampling(target, samples, rng: RngStream, config: BridgeConfig = BridgeConfig()) -> EstimatorResult:
    cfg = BridgeConfig(config.max_iterations, config.tol, config.proposal_draw_count, warp=True)
    return bridge_sampling(target, samples, rng, cfg)
