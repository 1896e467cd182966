"""Small dense linear algebra and log-domain scalar helpers.

Matrices are plain ``numpy`` arrays. Lower-triangular factors are returned as
full square arrays with zeros above the diagonal.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import linalg as sla
from scipy.linalg import lapack
from scipy.special import gammaln

SYMMETRY_RTOL = 1e-10


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a Cholesky pivot is not strictly positive."""

    def __init__(self, pivot: int):
        super().__init__(f"matrix is not positive definite (pivot {pivot} failed)")
        self.pivot = pivot


def symmetrize(m, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = np.max(np.abs(m)) if m.size else 0.0
    if np.max(np.abs(m - m.T), initial=0.0) > rtol * max(scale, 1e-300):
        raise ValueError("matrix is not symmetric")
    return 0.5 * (m + m.T)


def cholesky(m) -> np.ndarray:
    """Lower Cholesky factor of a symmetric positive-definite matrix.

    The input is checked for symmetry (relative tolerance 1e-10) and then
    symmetrized before factorization.

    Raises
    ------
    NotPositiveDefiniteError
        With ``pivot`` set to the zero-based index of the failing pivot.
    """
    a = symmetrize(m)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    c, info = lapack.dpotrf(a, lower=1, clean=1)
    if info > 0:
        raise NotPositiveDefiniteError(info - 1)
    if info < 0:
        raise ValueError(f"dpotrf: illegal argument {-info}")
    return c


def log_det_from_chol(l) -> float:
    """Log-determinant of ``l @ l.T`` given its lower factor ``l``."""
    diag = np.diagonal(np.asarray(l, dtype=float))
    if np.any(diag <= 0):
        raise ValueError("Cholesky factor must have a positive diagonal")
    return float(2.0 * np.sum(np.log(diag)))


def solve_triangular(l, b, transposed: bool = False) -> np.ndarray:
    """Solve ``l x = b`` (or ``l.T x = b``) for lower-triangular ``l``."""
    l = np.asarray(l, dtype=float)
    if np.any(np.diagonal(l) == 0):
        raise np.linalg.LinAlgError("triangular matrix is singular (zero diagonal)")
    return sla.solve_triangular(l, np.asarray(b, dtype=float), lower=True,
                                trans="T" if transposed else "N")


def log_sum_exp(values) -> float:
    """Stable ``log(sum(exp(values)))``; all ``-inf`` input gives ``-inf``."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("log_sum_exp of an empty sequence")
    m = np.max(v)
    if m == -np.inf:
        return -math.inf
    if m == np.inf:
        return math.inf
    return float(m + np.log(np.sum(np.exp(v - m))))


def log_mean_exp(values) -> float:
    v = np.asarray(values, dtype=float).ravel()
    return log_sum_exp(v) - math.log(v.size)


def log_multivariate_gamma(d: int, a: float) -> float:
    """``log Gamma_d(a) = d(d-1)/4 log(pi) + sum_j log Gamma(a + (1 - j)/2)``."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if a <= (d - 1) / 2.0:
        raise ValueError(f"log_multivariate_gamma requires a > (d-1)/2, got a={a}, d={d}")
    j = np.arange(1, d + 1)
    return float(d * (d - 1) / 4.0 * math.log(math.pi) + np.sum(gammaln(a + (1.0 - j) / 2.0)))


def _weighted_median_index(values: np.ndarray, log_weights: np.ndarray) -> int:
    # First sorted position where the cumulative weight reaches half the total;
    # at an exact half the lower candidate is the smallest minimizer. The
    # slack absorbs rounding in the rescaled weights so exact ties stay ties.
    order = np.lexsort((np.arange(values.size), values))
    lw = log_weights[order]
    top = np.max(lw)
    w = np.exp(lw - top)
    cum = np.cumsum(w)
    k = int(np.searchsorted(cum, 0.5 * cum[-1] * (1.0 - 1e-12), side="left"))
    return int(order[min(k, values.size - 1)])


def weighted_median(values, weights) -> float:
    """Minimizer of ``sum_i w_i |v_i - z|`` over the input values.

    Ties resolve to the smallest minimizing value.
    """
    v = np.asarray(values, dtype=float).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("weighted_median of an empty sequence")
    if v.size != w.size:
        raise ValueError(f"length mismatch: {v.size} values, {w.size} weights")
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be positive and finite")
    return float(v[_weighted_median_index(v, np.log(w))])
