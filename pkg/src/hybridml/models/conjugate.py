"""Normal observations with a normal / inverse-gamma prior on (mean, variance)."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from ..distributions import sample_inverse_gamma
from ..rng import RngStream
from ._densities import LOG_2PI, log_inverse_gamma, log_normal
from .base import Model, Support, Truth


class ConjugateNormal(Model):
    """``y_i ~ N(mu, s2)``, ``mu | s2 ~ N(m0, s2/w0)``, ``s2 ~ IG(r0/2, s0/2)``; ``u = (mu, s2)``."""

    name = "conjugate_normal"
    has_posterior_density = True

    def __init__(self, y, m0=0.0, w0=0.05, r0=3.0, s0=3.0):
        if w0 <= 0 or r0 <= 0 or s0 <= 0:
            raise ValueError("w0, r0 and s0 must be positive")
        self.y = np.asarray(y, dtype=float).ravel()
        self.data = self.y
        self.m0, self.w0, self.r0, self.s0 = float(m0), float(w0), float(r0), float(s0)
        self.dim = 2
        self.support = Support("positive-scale", np.array([False, True]))

        n = self.y.size
        self.n = n
        ybar = float(self.y.mean()) if n else 0.0
        self.ybar = ybar
        self.ss = float(np.sum((self.y - ybar) ** 2))
        self.mn = (n * ybar + self.w0 * self.m0) / (n + self.w0)
        self.wn = self.w0 + n
        self.rn = self.r0 + n
        self.sn = self.s0 + self.ss + n * self.w0 / (n + self.w0) * (ybar - self.m0) ** 2

    def _log_lik(self, u):
        mu, s2 = u[:, 0], u[:, 1]
        return -0.5 * self.n * (LOG_2PI + np.log(s2)) - (self.ss + self.n * (self.ybar - mu) ** 2) / (2 * s2)

    def _log_prior(self, u):
        mu, s2 = u[:, 0], u[:, 1]
        return log_normal(mu, self.m0, s2 / self.w0) + log_inverse_gamma(s2, self.r0 / 2, self.s0 / 2)

    def log_posterior_density(self, u):
        u = np.asarray(u, dtype=float)
        uu = u.reshape(-1, 2)
        mu, s2 = uu[:, 0], uu[:, 1]
        out = log_normal(mu, self.mn, s2 / self.wn) + log_inverse_gamma(s2, self.rn / 2, self.sn / 2)
        return float(out[0]) if u.ndim == 1 else out

    def truth(self, rng=None) -> Truth:
        val = (-0.5 * self.n * math.log(math.pi) + 0.5 * math.log(self.w0 / self.wn)
               + gammaln(self.rn / 2) - gammaln(self.r0 / 2)
               + self.r0 / 2 * math.log(self.s0) - self.rn / 2 * math.log(self.sn))
        return Truth(float(val))

    def sample_posterior(self, rng: RngStream, count: int) -> np.ndarray:
        s2 = sample_inverse_gamma(rng, self.rn / 2, self.sn / 2, size=count)
        mu = self.mn + np.sqrt(s2 / self.wn) * rng.standard_normal(count)
        return np.column_stack([mu, s2])


def conjugate_normal(rng: RngStream, n: int = 50, m0: float = 0.0, w0: float = 0.05,
                     r0: float = 3.0, s0: float = 3.0, gen_mean: float = 30.0,
                     gen_var: float = 4.0) -> ConjugateNormal:
    """Simulate ``n`` observations from ``N(gen_mean, gen_var)`` and build the model."""
    if n < 0:
        raise ValueError("n must be >= 0")
    y = gen_mean + math.sqrt(gen_var) * rng.standard_normal(n)
    return ConjugateNormal(y, m0=m0, w0=w0, r0=r0, s0=s0)
