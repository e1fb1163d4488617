"""First-order Marcum Q-function and the 2-dof non-central chi-squared CDF.

With ``mu = a^2/2`` and ``x = b^2/2`` the non-central chi-squared law is a
Poisson(mu) mixture of central laws, which gives

    Q1(a, b)     = sum_j  Pois(j; mu) * P(Pois(x) <= j)
    1 - Q1(a, b) = sum_m  Pois(m; x)  * P(Pois(mu) <  m)

Both are sums of non-negative terms; the cumulative Poisson factors are built by
forward recursion (running sums). The series for whichever side is smaller is
evaluated directly, so there is no cancellation in the reported tail.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln


def _poisson_pmf(rate: float, n: int) -> np.ndarray:
    j = np.arange(n, dtype=np.float64)
    if rate == 0.0:
        out = np.zeros(n)
        out[0] = 1.0
        return out
    return np.exp(j * math.log(rate) - rate - gammaln(j + 1.0))


def _terms(mu: float, x: float) -> int:
    top = max(mu, x)
    return int(top + 40.0 * math.sqrt(top) + 60)


def _check(a: float, b: float) -> None:
    for name, v in (("a", a), ("b", b)):
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"marcum_q1 requires finite {name} >= 0, got {v!r}")


def _marcum_scalar(a: float, b: float) -> float:
    _check(a, b)
    if b == 0.0:
        return 1.0
    mu, x = 0.5 * a * a, 0.5 * b * b
    n = _terms(mu, x)
    p_mu = _poisson_pmf(mu, n)
    p_x = _poisson_pmf(x, n)
    if b > a:
        q = float(np.dot(p_mu, np.cumsum(p_x)))
        return min(max(q, 0.0), 1.0)
    below = np.concatenate(([0.0], np.cumsum(p_mu)[:-1]))
    p = float(np.dot(p_x, below))
    return min(max(1.0 - p, 0.0), 1.0)


def marcum_q1(a, b):
    """Q1(a, b) = P(|X| > b) for X complex Gaussian, unit variance per axis, |E X| = a.

    Accepts scalars or broadcastable arrays.
    """
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        return _marcum_scalar(float(a), float(b))
    a_b, b_b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    out = np.empty(a_b.shape)
    for idx in np.ndindex(a_b.shape):
        out[idx] = _marcum_scalar(a_b[idx], b_b[idx])
    return out


def noncentral_chi2_cdf(t, lam, dof: int = 2):
    """CDF at ``t`` of a non-central chi-squared law with 2 dof and non-centrality ``lam``."""
    if dof != 2:
        raise ValueError("only 2 degrees of freedom are supported")
    t_arr, lam_arr = np.asarray(t, dtype=float), np.asarray(lam, dtype=float)
    if np.any(t_arr < 0) or np.any(lam_arr < 0):
        raise ValueError("t and lambda must be non-negative")
    out = 1.0 - marcum_q1(np.sqrt(lam_arr), np.sqrt(t_arr))
    return float(out) if np.ndim(out) == 0 else out
