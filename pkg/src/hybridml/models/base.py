"""Common contract for benchmark models.

Evaluators are vectorized: ``u`` may be a single point of shape ``(d,)`` (a
float is returned) or a batch of shape ``(m, d)`` (an array is returned).
Points outside the support have ``log_prior = -inf`` and ``psi = +inf``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from ..rng import RngStream


@dataclass(frozen=True)
class Support:
    kind: str  # "unconstrained" | "first-orthant" | "cholesky-lower-triangular" | "positive-scale"
    positive: np.ndarray  # boolean mask of coordinates that must be > 0

    def contains(self, u) -> np.ndarray:
        u = np.atleast_2d(u)
        return np.all(np.isfinite(u), axis=1) & np.all(u[:, self.positive] > 0, axis=1)


@dataclass(frozen=True)
class Truth:
    """Ground-truth log evidence and how it was computed.

    ``method`` is ``"closed"``, ``"quadrature"`` or ``"monte_carlo"``; ``se`` is
    the standard error of a Monte Carlo value and ``None`` otherwise.
    """

    value: float
    method: str = "closed"
    se: float | None = None


def batched(fn):
    """Wrap a batch evaluator ``(m, d) -> (m,)`` so single points return floats."""

    def wrapper(self, u):
        arr = np.asarray(u, dtype=float)
        single = arr.ndim <= 1 and arr.size == self.dim
        out = fn(self, arr.reshape(-1, self.dim))
        return float(out[0]) if single else out

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


class Model:
    """Base class; subclasses implement ``_log_lik``, ``_log_prior`` and ``sample_posterior``.

    Subclasses set ``name``, ``dim``, ``support`` and ``data`` in ``__init__``.
    """

    name = "model"
    dim = 0
    support: Support
    data: Any = None
    has_posterior_density = False

    # evaluators -----------------------------------------------------------
    @batched
    def log_lik(self, u):
        out = np.full(u.shape[0], -np.inf)
        ok = self.support.contains(u)
        if np.any(ok):
            out[ok] = self._log_lik(u[ok])
        return out

    @batched
    def log_prior(self, u):
        out = np.full(u.shape[0], -np.inf)
        ok = self.support.contains(u)
        if np.any(ok):
            out[ok] = self._log_prior(u[ok])
        return out

    def log_target(self, u):
        """Unnormalized log posterior, ``-psi``."""
        return self.log_lik(u) + self.log_prior(u)

    def psi(self, u):
        """Negative log unnormalized posterior; ``+inf`` off the support."""
        return -(self.log_lik(u) + self.log_prior(u))

    def in_support(self, u) -> np.ndarray:
        return self.support.contains(np.asarray(u, dtype=float).reshape(-1, self.dim))

    # optional -------------------------------------------------------------
    def log_posterior_density(self, u):
        raise NotImplementedError(f"{self.name} has no normalized posterior density")

    def truth(self, rng: RngStream | None = None) -> Truth:
        raise NotImplementedError

    def sample_posterior(self, rng: RngStream, count: int) -> np.ndarray:
        raise NotImplementedError

    def _log_lik(self, u):
        raise NotImplementedError

    def _log_prior(self, u):
        raise NotImplementedError


def chib_identity_check(model: Model, u) -> float:
    """``log_lik(u) + log_prior(u) - log_posterior_density(u)``, constant in ``u``."""
    u = np.asarray(u, dtype=float)
    if not np.all(model.in_support(u)):
        raise ValueError("point lies outside the model support")
    return model.log_lik(u) + model.log_prior(u) - model.log_posterior_density(u)
