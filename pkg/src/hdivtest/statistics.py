"""Test statistics for ``H0: beta = beta0`` in the linear IV model.

All statistics are functions of the null residuals ``e = Y - X * beta0``
and the instrument matrix ``Z``:

* ``JAR``: jackknifed AR statistic with the plain Gram kernel ``Z Z'``,
  normalised by its own heteroskedasticity-robust variance estimate.
* ``RJAR``: the same construction with the ridge projection
  ``Z (Z'Z + gamma I)^{-1} Z'``.
* ``BCCH`` / ``BCCH_ASY``: the maximum studentised instrument score ``M``,
  compared with the Bonferroni threshold ``1.1 z(alpha / 2K)`` or with the
  Gumbel-calibrated threshold for ``M**2``.
* ``FISHER``: ``-2 log p_J - 2 log p_M`` referred to chi-square(4).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any, Optional

import numpy as np
import scipy.linalg

from . import kernels
from .distributions import (
    chi2_4_sf,
    chi2_4_upper_quantile,
    gumbel_sf,
    gumbel_upper_quantile,
    normal_cdf,
    normal_sf,
    normal_upper_quantile,
)
from .errors import (
    AllDegenerateError,
    KTooSmallError,
    SingularMatrixError,
    ZeroDenominatorError,
)

C_BCCH = 1.1
P_VALUE_FLOOR = 1e-300


class Method(str, Enum):
    JAR = "JAR"
    RJAR = "RJAR"
    BCCH = "BCCH"
    BCCH_ASY = "BCCH_ASY"
    FISHER = "FISHER"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown method {value!r}; expected one of {choices}") from None


ALL_METHODS = tuple(Method)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Observed sample ``(Y, X, Z)`` with ``n`` rows and ``K`` instruments.

    Arrays are copied and made read-only, which lets the Gram matrix and
    ridge projections be cached on the instance.
    """

    Y: np.ndarray
    X: np.ndarray
    Z: np.ndarray
    metadata: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        Y = np.array(self.Y, dtype=float).reshape(-1)
        X = np.array(self.X, dtype=float).reshape(-1)
        Z = np.array(self.Z, dtype=float)
        if Z.ndim == 1:
            Z = Z.reshape(-1, 1)
        if Z.ndim != 2:
            raise ValueError(f"Z must be a matrix, got shape {Z.shape}")
        if not Y.shape[0] == X.shape[0] == Z.shape[0]:
            raise ValueError(
                f"Y, X and Z must have the same number of rows, got {Y.shape[0]}, {X.shape[0]}, {Z.shape[0]}"
            )
        if Y.shape[0] < 2:
            raise ValueError("need at least two observations")
        if Z.shape[1] < 1:
            raise ValueError("need at least one instrument")
        for name, arr in (("Y", Y), ("X", X), ("Z", Z)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            arr.setflags(write=False)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Z", np.ascontiguousarray(Z))

    @property
    def n(self) -> int:
        return self.Z.shape[0]

    @property
    def K(self) -> int:
        return self.Z.shape[1]

    @property
    def gram(self) -> np.ndarray:
        """``Z Z'`` (computed once per dataset)."""
        if "gram" not in self._cache:
            G = self.Z @ self.Z.T
            G.setflags(write=False)
            self._cache["gram"] = G
        return self._cache["gram"]

    def ridge_projection(self, gamma: float) -> np.ndarray:
        key = ("ridge", float(gamma))
        if key not in self._cache:
            P = ridge_projection(self.Z, gamma)
            P.setflags(write=False)
            self._cache[key] = P
        return self._cache[key]


@dataclass(frozen=True)
class TestResult:
    method: Method
    statistic: float
    p_value: float
    critical_value: float
    reject: bool
    alpha: float
    detail: Optional[dict] = None

    __test__ = False  # keep pytest from collecting this class

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["method"] = self.method.value
        return out


def _check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    return alpha


def residuals(data: Dataset, beta0: float) -> np.ndarray:
    """Null residuals ``e_i = Y_i - X_i * beta0``."""
    beta0 = float(beta0)
    if not math.isfinite(beta0):
        raise ValueError("beta0 must be finite")
    return data.Y - data.X * beta0


def _quadratic_ratio(P, e, name):
    num, den = kernels.pair_sums(P, e)
    if not den > 0.0:
        raise ZeroDenominatorError(f"{name}: variance estimate is zero at this beta0")
    return num / math.sqrt(2.0 * den)


def jar_statistic(data: Dataset, e) -> float:
    """Tuning-free jackknifed AR statistic.

    ``sum_{i!=j} e_i e_j Z_i'Z_j / sqrt(2 sum_{i!=j} e_i^2 e_j^2 (Z_i'Z_j)^2)``.
    The rank normalisation of the projection form cancels and is never
    computed.

    Raises
    ------
    ZeroDenominatorError
        If the denominator is exactly zero (for example ``e == 0``).
    """
    return _quadratic_ratio(data.gram, e, "JAR")


def ridge_projection(Z, gamma: float) -> np.ndarray:
    """``Z (Z'Z + gamma I)^{-1} Z'``, symmetrised.

    For ``K > n`` and ``gamma > 0`` the equivalent ``n x n`` system
    ``(ZZ' + gamma I)^{-1} ZZ'`` is solved instead.
    """
    Z = np.asarray(Z, dtype=float)
    gamma = float(gamma)
    if not (math.isfinite(gamma) and gamma >= 0.0):
        raise ValueError(f"gamma must be a finite nonnegative number, got {gamma}")
    n, K = Z.shape
    if gamma == 0.0:
        A = Z.T @ Z
        eig = np.linalg.eigvalsh(A)
        if eig[0] <= eig[-1] * K * np.finfo(float).eps * 10:
            raise SingularMatrixError("Z'Z is singular; supply gamma > 0")
        P = Z @ scipy.linalg.cho_solve(scipy.linalg.cho_factor(A), Z.T)
    elif K <= n:
        A = Z.T @ Z
        A[np.diag_indices(K)] += gamma
        P = Z @ scipy.linalg.cho_solve(scipy.linalg.cho_factor(A), Z.T)
    else:
        G = Z @ Z.T
        A = G.copy()
        A[np.diag_indices(n)] += gamma
        P = scipy.linalg.cho_solve(scipy.linalg.cho_factor(A), G)
    return 0.5 * (P + P.T)


def rjar_statistic(data: Dataset, e, gamma: float) -> float:
    """Ridge-regularised jackknifed AR statistic at a user-supplied ``gamma``."""
    return _quadratic_ratio(data.ridge_projection(gamma), e, "RJAR")


def max_statistic(data: Dataset, e) -> tuple[float, np.ndarray]:
    """Maximum studentised instrument score.

    Returns ``M = max_k |S_k / sigma_k|`` with ``S_k = n^{-1/2} sum_i e_i Z_ik``
    and ``sigma_k^2 = n^{-1} sum_i e_i^2 Z_ik^2``, plus the per-instrument
    vector (``nan`` where ``sigma_k = 0``; those columns are skipped).
    """
    num, den = kernels.column_scores(data.Z, e)
    valid = den > 0.0
    if not np.any(valid):
        raise AllDegenerateError("every instrument has zero score variance at this beta0")
    per = np.full(den.shape, np.nan)
    # the 1/sqrt(n) factors of S_k and sigma_k cancel
    per[valid] = np.abs(num[valid]) / np.sqrt(den[valid])
    return float(np.max(per[valid])), per


def omega_hat(data: Dataset, e) -> float:
    """Variance estimator ``2 (n-1)^{-2} sum_{i!=j} e_i^2 e_j^2 (Z_i'Z_j)^2``."""
    n = data.n
    _, den = kernels.pair_sums(data.gram, e)
    return 2.0 * den / (n - 1) ** 2


def _log_log_k(K):
    K = int(K)
    if K < 2:
        raise KTooSmallError(f"the Gumbel calibration needs K >= 2, got K={K}")
    return math.log(K), math.log(math.log(K))


def refined_critical_value(K: int, alpha: float) -> float:
    """Threshold ``c(alpha) = 2 log K - log log K + q_alpha`` for ``M**2``."""
    logk, loglogk = _log_log_k(K)
    return 2.0 * logk - loglogk + gumbel_upper_quantile(_check_alpha(alpha))


def bcch_critical_value(K: int, alpha: float) -> float:
    """Bonferroni threshold ``1.1 z(alpha / 2K)`` for ``M``."""
    K = int(K)
    if K < 1:
        raise ValueError("K must be at least 1")
    return C_BCCH * normal_upper_quantile(_check_alpha(alpha) / (2 * K))


def jar_p_value(statistic: float) -> float:
    return normal_sf(statistic)


def max_p_value(M: float, K: int) -> float:
    """``1 - G(M^2 - 2 log K + log log K)``."""
    logk, loglogk = _log_log_k(K)
    return gumbel_sf(M * M - 2.0 * logk + loglogk)


def quadratic_decision(statistic: float, alpha: float, method=Method.JAR) -> TestResult:
    """One-sided normal decision shared by JAR and RJAR: reject if ``stat >= z(alpha)``."""
    alpha = _check_alpha(alpha)
    crit = normal_upper_quantile(alpha)
    return TestResult(
        method=Method.parse(method),
        statistic=float(statistic),
        p_value=jar_p_value(statistic),
        critical_value=crit,
        reject=bool(statistic >= crit),
        alpha=alpha,
    )


def bcch_decision(M: float, K: int, alpha: float) -> TestResult:
    """Bonferroni max test: reject iff ``M > 1.1 z(alpha / 2K)``.

    The p-value ``min(1, 2K (1 - Phi(M / 1.1)))`` inverts the same rule and
    is conservative.
    """
    alpha = _check_alpha(alpha)
    crit = bcch_critical_value(K, alpha)
    p = min(1.0, 2 * int(K) * normal_sf(M / C_BCCH))
    return TestResult(
        method=Method.BCCH,
        statistic=float(M),
        p_value=p,
        critical_value=crit,
        reject=bool(M > crit),
        alpha=alpha,
        detail={"p_value_rule": "bonferroni", "conservative": True},
    )


def bcch_asy_decision(M: float, K: int, alpha: float) -> TestResult:
    """Gumbel-calibrated max test on ``M**2``: reject iff ``M**2 >= c(alpha)``."""
    alpha = _check_alpha(alpha)
    crit = refined_critical_value(K, alpha)
    return TestResult(
        method=Method.BCCH_ASY,
        statistic=float(M * M),
        p_value=max_p_value(M, K),
        critical_value=crit,
        reject=bool(M * M >= crit),
        alpha=alpha,
    )


def fisher_statistic(p_J: float, p_M: float) -> float:
    """``-2 log p_J - 2 log p_M`` with both p-values floored at 1e-300."""
    p_J = min(max(float(p_J), P_VALUE_FLOOR), 1.0)
    p_M = min(max(float(p_M), P_VALUE_FLOOR), 1.0)
    return -2.0 * math.log(p_J) - 2.0 * math.log(p_M)


def fisher_decision(jar: float, M: float, K: int, alpha: float) -> TestResult:
    alpha = _check_alpha(alpha)
    p_J = jar_p_value(jar)
    p_M = max_p_value(M, K)
    F = fisher_statistic(p_J, p_M)
    crit = chi2_4_upper_quantile(alpha)
    return TestResult(
        method=Method.FISHER,
        statistic=F,
        p_value=chi2_4_sf(F),
        critical_value=crit,
        reject=bool(F >= crit),
        alpha=alpha,
        detail={"p_J": p_J, "p_M": p_M, "jar": float(jar), "max_squared": float(M * M)},
    )


def run_test(
    data: Dataset,
    beta0: float,
    method="JAR",
    alpha: float = 0.05,
    gamma: Optional[float] = None,
) -> TestResult:
    """Run one of the five tests of ``H0: beta = beta0``.

    Parameters
    ----------
    data : Dataset
    beta0 : float
        Hypothesised coefficient.
    method : Method or str
        ``JAR``, ``RJAR``, ``BCCH``, ``BCCH_ASY`` or ``FISHER``.
    alpha : float
        Significance level.
    gamma : float, optional
        Ridge penalty; required for ``RJAR`` and ignored otherwise.

    Raises
    ------
    DegenerateStatisticError
        If the statistic is undefined at ``beta0``.
    """
    method = Method.parse(method)
    alpha = _check_alpha(alpha)
    if method is Method.RJAR and gamma is None:
        raise ValueError("RJAR requires a ridge parameter gamma")
    e = residuals(data, beta0)

    if method is Method.JAR:
        return quadratic_decision(jar_statistic(data, e), alpha, Method.JAR)
    if method is Method.RJAR:
        res = quadratic_decision(rjar_statistic(data, e, gamma), alpha, Method.RJAR)
        return replace(res, detail={"gamma": float(gamma)})
    if method is Method.BCCH:
        M, _ = max_statistic(data, e)
        return bcch_decision(M, data.K, alpha)
    if method is Method.BCCH_ASY:
        _log_log_k(data.K)
        M, _ = max_statistic(data, e)
        return bcch_asy_decision(M, data.K, alpha)

    _log_log_k(data.K)
    try:
        jar = jar_statistic(data, e)
    except ZeroDenominatorError as exc:
        raise ZeroDenominatorError(f"FISHER: JAR component undefined ({exc})") from exc
    try:
        M, _ = max_statistic(data, e)
    except AllDegenerateError as exc:
        raise AllDegenerateError(f"FISHER: max-type component undefined ({exc})") from exc
    return fisher_decision(jar, M, data.K, alpha)


def theoretical_local_power(zeta, sigma_Z, omega: float, n: int, alpha: float = 0.05) -> float:
    """Asymptotic JAR power ``Phi(-z(alpha) + n zeta' Sigma^2 zeta / sqrt(omega))``."""
    zeta = np.asarray(zeta, dtype=float).reshape(-1)
    S = np.asarray(sigma_Z, dtype=float)
    if S.shape != (zeta.size, zeta.size):
        raise ValueError("sigma_Z must be K x K with K = len(zeta)")
    if np.max(np.abs(S - S.T), initial=0.0) > 1e-10:
        raise ValueError("sigma_Z must be symmetric")
    if np.linalg.eigvalsh(0.5 * (S + S.T))[0] < -1e-10:
        raise ValueError("sigma_Z must be positive semidefinite")
    if not omega > 0:
        raise ValueError("omega must be positive")
    Sz = S @ zeta
    signal = n * float(Sz @ Sz) / math.sqrt(omega)
    return normal_cdf(-normal_upper_quantile(_check_alpha(alpha)) + signal)
