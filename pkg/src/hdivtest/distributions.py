"""Distribution functions behind every test decision.

Only three laws are needed: the standard normal (JAR, RJAR, BCCH), the
Gumbel-type limit ``G(x) = exp(-exp(-x/2) / sqrt(pi))`` for the squared
maximum statistic, and the chi-square law with four degrees of freedom for
the Fisher combination.

CDFs accept scalars or arrays. Quantiles take a scalar upper-tail
probability ``alpha`` and are cached, since test inversion asks for the same
critical value at every grid point.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import log_ndtr, ndtr, ndtri

__all__ = [
    "normal_cdf",
    "normal_sf",
    "normal_upper_quantile",
    "gumbel_cdf",
    "gumbel_sf",
    "gumbel_upper_quantile",
    "chi2_4_cdf",
    "chi2_4_sf",
    "chi2_4_upper_quantile",
]

_HALF_LOG_PI = 0.5 * math.log(math.pi)


def _finite(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("input must be finite")
    return arr


def _out(arr):
    return float(arr) if arr.ndim == 0 else arr


def _check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    return alpha


def normal_cdf(x):
    """Standard normal CDF, computed through the complementary error function."""
    return _out(ndtr(_finite(x)))


def normal_sf(x):
    """Upper tail ``1 - Phi(x)`` without cancellation for large ``x``."""
    return _out(ndtr(-_finite(x)))


@lru_cache(maxsize=256)
def normal_upper_quantile(alpha: float) -> float:
    """Return ``z`` with ``P(N(0,1) > z) = alpha``.

    The root is found on the log tail probability so that deep-tail
    levels such as ``alpha / (2K)`` keep full relative accuracy.
    """
    alpha = _check_alpha(alpha)
    if alpha == 0.5:
        return 0.0
    if alpha > 0.5:
        # 1 - alpha is exact here.
        return -normal_upper_quantile(1.0 - alpha)
    target = math.log(alpha)
    z0 = -float(ndtri(alpha))
    width = 1e-3 * (1.0 + z0)
    lo, hi = z0 - width, z0 + width
    f = lambda z: float(log_ndtr(-z)) - target
    while f(lo) < 0.0:
        lo -= width
        width *= 2.0
    while f(hi) > 0.0:
        hi += width
        width *= 2.0
    return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def _gumbel_log_rate(x):
    # -log G(x) = exp(-x/2 - log(pi)/2)
    return -0.5 * x - _HALF_LOG_PI


def gumbel_cdf(x):
    """CDF ``exp(-pi**-0.5 * exp(-x/2))`` of the squared-maximum limit law."""
    x = _finite(x)
    with np.errstate(over="ignore"):
        return _out(np.exp(-np.exp(_gumbel_log_rate(x))))


def gumbel_sf(x):
    """Upper tail ``1 - G(x)``, accurate when ``G(x)`` is close to one."""
    x = _finite(x)
    with np.errstate(over="ignore"):
        return _out(-np.expm1(-np.exp(_gumbel_log_rate(x))))


@lru_cache(maxsize=256)
def gumbel_upper_quantile(alpha: float) -> float:
    """Closed-form ``(1 - alpha)``-quantile: ``-log(pi) - 2 log(log(1/(1-alpha)))``."""
    alpha = _check_alpha(alpha)
    return -math.log(math.pi) - 2.0 * math.log(-math.log1p(-alpha))


def chi2_4_cdf(x):
    """CDF of chi-square(4): ``1 - (1 + x/2) exp(-x/2)`` for ``x >= 0``."""
    x = _finite(x)
    h = 0.5 * np.maximum(x, 0.0)
    return _out(-np.expm1(-h) - h * np.exp(-h))


def chi2_4_sf(x):
    """Upper tail ``(1 + x/2) exp(-x/2)`` of chi-square(4)."""
    x = _finite(x)
    h = 0.5 * np.maximum(x, 0.0)
    return _out((1.0 + h) * np.exp(-h))


@lru_cache(maxsize=256)
def chi2_4_upper_quantile(alpha: float) -> float:
    """Return ``l`` with ``P(chi2_4 > l) = alpha`` by bracketed root finding."""
    alpha = _check_alpha(alpha)
    if alpha > 0.5:
        # near the origin the CDF is ~x**2/8; solve on it instead of the tail
        target = 1.0 - alpha
        f = lambda x: float(chi2_4_cdf(x)) - target
    else:
        target = math.log(alpha)
        f = lambda x: math.log1p(0.5 * x) - 0.5 * x - target
    hi = 4.0
    while f(hi) * (1 if alpha > 0.5 else -1) < 0.0:
        hi *= 2.0
    return brentq(f, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
