"""Weak-instrument robust inference for high-dimensional IV regression.

Tests of ``H0: beta = beta0`` in ``Y = X beta + eps``, ``X = Z' Pi + v``
that stay valid however weak the instruments are: the tuning-free JAR
quadratic test, the Gumbel-calibrated maximum test (BCCH_ASY), their Fisher
combination, and the RJAR and BCCH baselines.
"""
from .distributions import (
    chi2_4_upper_quantile,
    gumbel_cdf,
    gumbel_upper_quantile,
    normal_cdf,
    normal_upper_quantile,
)
from .errors import (
    AllDegenerateError,
    DataError,
    DegenerateStatisticError,
    IVTestError,
    KTooSmallError,
    ParseError,
    SingularMatrixError,
    ZeroDenominatorError,
)
from .inference import ConfidenceSet, GridSpec, invert, test_at
from .io import load_dataset
from .kernels import BACKEND
from .simulation import (
    DGPConfig,
    MCConfig,
    RejectionTable,
    Sparsity,
    example_suite,
    generate,
    run_monte_carlo,
)
from .statistics import (
    Dataset,
    Method,
    TestResult,
    fisher_statistic,
    jar_statistic,
    max_statistic,
    omega_hat,
    residuals,
    rjar_statistic,
    run_test,
)

__version__ = "0.1.0"
