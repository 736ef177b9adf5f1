"""Data-generating processes and the Monte Carlo size/power harness.

The design follows the correlated-Gaussian IV model used to compare JAR,
RJAR, BCCH, BCCH_ASY and FISHER:

    Z_i ~ N(0, Sigma),  Sigma_lm = rho^|l-m|
    eps_i = (sigma_eps + a0 * Z_i1 * ea_i) * eta1_i
    v_i = sigma_v * eta2_i,  corr(eta1, eta2) = eta_corr
    X_i = Z_i' (tau psi) + v_i,  Y_i = X_i beta + eps_i

with ``psi = (1_q, 0_{K-q})`` and ``tau`` chosen so that the concentration
parameter ``n Pi' Sigma Pi / sigma_v^2`` equals ``mu2``.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import DegenerateDirectionError, DegenerateStatisticError
from .statistics import (
    ALL_METHODS,
    Dataset,
    Method,
    bcch_critical_value,
    jar_statistic,
    max_statistic,
    refined_critical_value,
    residuals,
    rjar_statistic,
    run_test,
)

THREADS_ENV = "HDIVTEST_THREADS"


@dataclass(frozen=True)
class Sparsity:
    """First-stage pattern: the first ``q`` of ``K`` coefficients are nonzero."""

    kind: str
    q: int

    def __post_init__(self):
        if self.kind not in ("sparse", "dense"):
            raise ValueError(f"sparsity kind must be 'sparse' or 'dense', got {self.kind!r}")
        if int(self.q) != self.q or self.q < 1:
            raise ValueError(f"q must be a positive integer, got {self.q}")
        object.__setattr__(self, "q", int(self.q))

    @classmethod
    def sparse(cls, K: int) -> "Sparsity":
        """``q = ceil(0.03 K)``."""
        return cls("sparse", -(-3 * K // 100))

    @classmethod
    def dense(cls, K: int, fraction: float = 0.6) -> "Sparsity":
        """``q = ceil(fraction * K)``; the default is the 0.6K design."""
        return cls("dense", math.ceil(round(fraction * K, 9)))

    def __str__(self):
        return f"{self.kind}({self.q})"


@dataclass(frozen=True)
class DGPConfig:
    n: int
    K: int
    mu2: float
    sparsity: Sparsity
    rho: float = 0.6
    a0: float = 0.0
    sigma_eps2: float = 2.0
    sigma_v2: float = 1.0
    eta_corr: float = 0.6
    beta: float = 1.0
    beta0: float = 1.0

    def __post_init__(self):
        if self.n < 2 or self.K < 1:
            raise ValueError("need n >= 2 and K >= 1")
        if not 1 <= self.sparsity.q <= self.K:
            raise ValueError(f"q={self.sparsity.q} must lie in [1, K={self.K}]")
        if self.mu2 < 0:
            raise ValueError("mu2 must be nonnegative")
        if not abs(self.rho) < 1:
            raise ValueError("|rho| must be < 1")
        if self.sigma_eps2 <= 0 or self.sigma_v2 <= 0:
            raise ValueError("error variances must be positive")
        if not abs(self.eta_corr) < 1:
            raise ValueError("eta_corr must lie in (-1, 1)")

    @property
    def psi(self) -> np.ndarray:
        psi = np.zeros(self.K)
        psi[: self.sparsity.q] = 1.0
        return psi

    @property
    def tau(self) -> float:
        return calibrate_tau(self.psi, ar1_covariance(self.K, self.rho), self.mu2, self.n, self.sigma_v2)

    @property
    def first_stage(self) -> np.ndarray:
        """First-stage coefficient vector ``Pi = tau psi``."""
        return self.tau * self.psi


@dataclass(frozen=True)
class MCConfig:
    dgp: DGPConfig
    replications: int = 300
    alpha: float = 0.05
    master_seed: int = 0
    methods: tuple = ALL_METHODS
    gamma: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        methods = tuple(Method.parse(m) for m in self.methods)
        if not methods:
            raise ValueError("at least one method is required")
        object.__setattr__(self, "methods", methods)
        if Method.RJAR in methods and self.gamma is None:
            raise ValueError("RJAR requires gamma")


@dataclass(frozen=True)
class RejectionRow:
    label: str
    n: int
    K: int
    a0: float
    mu2: float
    sparsity: str
    q: int
    beta: float
    beta0: float
    method: str
    rejections: int
    replications: int
    degenerate_count: int
    rejection_frequency: float
    mc_standard_error: float


@dataclass
class RejectionTable:
    rows: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def extend(self, other: "RejectionTable") -> None:
        self.rows.extend(other.rows)

    def frequency(self, method, beta=None) -> float:
        """Rejection frequency for a method (and beta, when several are present)."""
        method = Method.parse(method).value
        hits = [r for r in self.rows if r.method == method and (beta is None or r.beta == beta)]
        if len(hits) != 1:
            raise KeyError(f"expected one row for {method} beta={beta}, found {len(hits)}")
        return hits[0].rejection_frequency


@dataclass(frozen=True)
class TimingRow:
    K: int
    sparsity: str
    method: str
    mean_seconds: float
    reps: int


@dataclass(frozen=True)
class CurveRow:
    K: int
    bcch_threshold: float
    refined_threshold: float


def ar1_covariance(K: int, rho: float) -> np.ndarray:
    """Toeplitz matrix with entries ``rho ** |l - m|``."""
    if not abs(rho) < 1:
        raise ValueError("|rho| must be < 1")
    return scipy.linalg.toeplitz(float(rho) ** np.arange(K))


@lru_cache(maxsize=32)
def _ar1_cholesky(K: int, rho: float) -> np.ndarray:
    L = np.linalg.cholesky(ar1_covariance(K, rho))
    L.setflags(write=False)
    return L


def calibrate_tau(psi, sigma_Z, mu2: float, n: int, sigma_v2: float = 1.0) -> float:
    """Scale so that ``Pi = tau psi`` has concentration parameter ``mu2``."""
    psi = np.asarray(psi, dtype=float)
    if mu2 < 0:
        raise ValueError("mu2 must be nonnegative")
    if mu2 == 0:
        return 0.0
    quad = float(psi @ np.asarray(sigma_Z, dtype=float) @ psi)
    if not quad > 0:
        raise DegenerateDirectionError("psi' Sigma psi is zero but mu2 > 0")
    return math.sqrt(sigma_v2 * mu2 / (n * quad))


def concentration(dgp: DGPConfig) -> float:
    """``n Pi' Sigma Pi / sigma_v^2`` for the configured design."""
    Pi = dgp.first_stage
    return dgp.n * float(Pi @ ar1_covariance(dgp.K, dgp.rho) @ Pi) / dgp.sigma_v2


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def generate(dgp: DGPConfig, seed) -> Dataset:
    """Draw one dataset from ``dgp``; deterministic given ``seed``.

    ``seed`` may be an integer, a ``SeedSequence`` or a ``Generator``.
    Draw order is fixed: instrument innovations, then ``(eta1, eta2)``,
    then the heteroskedasticity shocks ``ea``.
    """
    rng = _rng(seed)
    n, K = dgp.n, dgp.K
    Z = rng.standard_normal((n, K)) @ _ar1_cholesky(K, float(dgp.rho)).T
    u = rng.standard_normal((n, 2))
    ea = rng.standard_normal(n)
    r = dgp.eta_corr
    eta1 = u[:, 0]
    eta2 = r * u[:, 0] + math.sqrt(1.0 - r * r) * u[:, 1]
    eps = (math.sqrt(dgp.sigma_eps2) + dgp.a0 * Z[:, 0] * ea) * eta1
    v = math.sqrt(dgp.sigma_v2) * eta2
    X = Z @ dgp.first_stage + v
    Y = X * dgp.beta + eps
    return Dataset(Y, X, Z)


def replication_seed(master_seed: int, replication: int) -> np.random.SeedSequence:
    """Independent stream for one replication, hashed from the master seed and counter."""
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(replication),))


def default_threads() -> int:
    value = os.environ.get(THREADS_ENV)
    return max(1, int(value)) if value else 1


def _one_replication(cfg: MCConfig, r: int):
    data = generate(cfg.dgp, replication_seed(cfg.master_seed, r))
    out = []
    for m in cfg.methods:
        try:
            res = run_test(data, cfg.dgp.beta0, m, cfg.alpha, cfg.gamma)
            out.append((res.reject, False))
        except DegenerateStatisticError:
            out.append((False, True))
    return out


def run_monte_carlo(cfg: MCConfig, threads: Optional[int] = None) -> RejectionTable:
    """Empirical rejection frequencies of every requested method.

    Replication ``r`` always uses ``replication_seed(cfg.master_seed, r)``,
    so results do not depend on ``threads``. Degenerate statistics count as
    non-rejections and are tallied separately.
    """
    threads = default_threads() if threads is None else max(1, int(threads))
    reps = range(cfg.replications)
    if threads == 1:
        outcomes = [_one_replication(cfg, r) for r in reps]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(lambda r: _one_replication(cfg, r), reps))

    d = cfg.dgp
    R = cfg.replications
    rows = []
    for j, m in enumerate(cfg.methods):
        hits = sum(1 for o in outcomes if o[j][0])
        degen = sum(1 for o in outcomes if o[j][1])
        f = hits / R
        rows.append(
            RejectionRow(
                label=cfg.label,
                n=d.n,
                K=d.K,
                a0=d.a0,
                mu2=d.mu2,
                sparsity=d.sparsity.kind,
                q=d.sparsity.q,
                beta=d.beta,
                beta0=d.beta0,
                method=m.value,
                rejections=hits,
                replications=R,
                degenerate_count=degen,
                rejection_frequency=f,
                mc_standard_error=math.sqrt(f * (1.0 - f) / R),
            )
        )
    return RejectionTable(rows)


def run_suite(configs: Sequence[MCConfig], threads: Optional[int] = None) -> RejectionTable:
    table = RejectionTable()
    for cfg in configs:
        table.extend(run_monte_carlo(cfg, threads))
    return table


def null_statistics(dgp: DGPConfig, replications: int, master_seed: int = 0) -> dict:
    """JAR values and centred ``M**2`` values over independent draws of ``dgp``.

    The centred maximum ``M**2 - 2 log K + log log K`` is returned as
    ``max_centered``; under the null it is approximately Gumbel.
    """
    K = dgp.K
    shift = 2.0 * math.log(K) - math.log(math.log(K)) if K >= 2 else float("nan")
    jar = np.empty(replications)
    mc = np.empty(replications)
    for r in range(replications):
        data = generate(dgp, replication_seed(master_seed, r))
        e = residuals(data, dgp.beta0)
        jar[r] = jar_statistic(data, e)
        M, _ = max_statistic(data, e)
        mc[r] = M * M - shift
    return {"jar": jar, "max_centered": mc}


# ---------------------------------------------------------------- examples

EXAMPLE_IDS = ("E1_1", "E1_2", "E2_1", "E2_2", "E3_1", "E3_2", "E4_1", "E4_2")
_EXAMPLE_K = {"E1": 100, "E2": 200, "E3": 300}
_NULL_AND_ALTERNATIVES = (-1.0, 0.0, 1.0, 2.0, 3.0)
_SUITE_BETA0 = 1.0
_DEFAULT_GAMMA = 1.0


def _apply_overrides(cfg: MCConfig, overrides: dict) -> MCConfig:
    mc_keys = {f.name for f in fields(MCConfig)} - {"dgp"}
    dgp_keys = {f.name for f in fields(DGPConfig)}
    mc_over, dgp_over = {}, {}
    for key, value in overrides.items():
        if key in mc_keys:
            mc_over[key] = value
        elif key in dgp_keys:
            dgp_over[key] = value
        else:
            raise ValueError(f"unknown override {key!r}")
    dgp = replace(cfg.dgp, **dgp_over) if dgp_over else cfg.dgp
    return replace(cfg, dgp=dgp, **mc_over)


def example_suite(example_id: str, overrides: Optional[dict] = None) -> list:
    """Expand one of the simulation examples into its factorial design.

    ``E1_*``, ``E2_*``, ``E3_*`` fix ``(n, K) = (200, 100 | 200 | 300)`` and
    cross ``mu2 in {30, 180}``, sparse/dense and ``beta in {-1, 0, 1, 2, 3}``;
    the ``_1`` variants are homoskedastic and ``_2`` use ``a0 = 0.5``.
    ``E4_1`` crosses ``K in {100, 200, 300}``, sparse ``q in {1,3,5,7,9}``
    and ``beta in {-1, 3}`` at ``mu2 = 30``; ``E4_2`` does the same with
    dense ``q = iota K`` for ``iota in {0.2, ..., 1.0}``.

    RJAR is included with ``gamma = 1.0`` unless overridden.
    """
    eid = str(example_id).upper()
    if eid not in EXAMPLE_IDS:
        raise ValueError(f"unknown example {example_id!r}; expected one of {', '.join(EXAMPLE_IDS)}")
    base = dict(n=200, beta0=_SUITE_BETA0)
    configs = []

    def add(label, K, sparsity, mu2, a0, beta):
        dgp = DGPConfig(K=K, sparsity=sparsity, mu2=mu2, a0=a0, beta=beta, **base)
        configs.append(MCConfig(dgp=dgp, gamma=_DEFAULT_GAMMA, label=label))

    if eid[:2] in _EXAMPLE_K:
        K = _EXAMPLE_K[eid[:2]]
        a0 = 0.0 if eid.endswith("_1") else 0.5
        for mu2 in (30.0, 180.0):
            for sp in (Sparsity.sparse(K), Sparsity.dense(K)):
                for beta in _NULL_AND_ALTERNATIVES:
                    add(eid, K, sp, mu2, a0, beta)
    else:
        for K in (100, 200, 300):
            if eid == "E4_1":
                patterns = [Sparsity("sparse", q) for q in (1, 3, 5, 7, 9)]
            else:
                patterns = [Sparsity.dense(K, iota) for iota in (0.2, 0.4, 0.6, 0.8, 1.0)]
            for sp in patterns:
                for beta in (-1.0, 3.0):
                    add(eid, K, sp, 30.0, 0.0, beta)

    if overrides:
        configs = [_apply_overrides(c, overrides) for c in configs]
    return configs


# ---------------------------------------------------------------- benchmarks


def timing_benchmark(
    K_list: Sequence[int],
    reps: int = 100,
    n: int = 200,
    gamma: float = 1.0,
    seed: int = 0,
) -> list:
    """Mean wall-clock time of RJAR and JAR on fresh datasets.

    Each call starts from a dataset with an empty cache, so JAR pays for its
    Gram matrix and RJAR for its ridge solve. Data generation is not timed.
    """
    rows = []
    for K in K_list:
        for sp in (Sparsity.sparse(K), Sparsity.dense(K)):
            dgp = DGPConfig(n=n, K=K, mu2=30.0, sparsity=sp, a0=0.0)
            totals = {"RJAR": 0.0, "JAR": 0.0}
            for r in range(reps):
                data = generate(dgp, replication_seed(seed, r))
                e = residuals(data, dgp.beta0)
                fresh = Dataset(data.Y, data.X, data.Z)
                t0 = time.perf_counter()
                rjar_statistic(fresh, e, gamma)
                totals["RJAR"] += time.perf_counter() - t0
                fresh = Dataset(data.Y, data.X, data.Z)
                t0 = time.perf_counter()
                jar_statistic(fresh, e)
                totals["JAR"] += time.perf_counter() - t0
            for method, total in totals.items():
                rows.append(TimingRow(K, sp.kind, method, total / reps, reps))
    return rows


def critical_value_curve(K_list: Sequence[int] = tuple(range(100, 1001, 100)), alpha: float = 0.05) -> list:
    """Bonferroni threshold ``1.1 z(alpha/2K)`` against ``sqrt(c(alpha))`` for ``M``."""
    rows = []
    for K in K_list:
        if K < 2:
            raise ValueError("each K must be >= 2")
        rows.append(CurveRow(int(K), bcch_critical_value(K, alpha), math.sqrt(refined_critical_value(K, alpha))))
    return rows
