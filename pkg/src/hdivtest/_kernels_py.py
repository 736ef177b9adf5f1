"""Pure numpy versions of the hot kernels.

Both kernels take a symmetric ``n x n`` matrix or an ``n x K`` instrument
matrix together with a residual vector ``e``.
"""
import numpy as np


def pair_sums(P, e):
    """Off-diagonal quadratic sums of a symmetric matrix.

    Returns ``(sum_{i != j} P_ij e_i e_j, sum_{i != j} P_ij**2 e_i**2 e_j**2)``.
    Only the strict upper triangle is read, so ``P`` must be symmetric.
    """
    P = np.asarray(P, dtype=float)
    e = np.asarray(e, dtype=float)
    n = e.shape[0]
    if P.shape != (n, n):
        raise ValueError("P must be n x n with n = len(e)")
    U = np.triu(P, 1)
    e2 = e * e
    num = e @ U @ e
    den = e2 @ (U * U) @ e2
    return 2.0 * float(num), 2.0 * float(den)


def column_scores(Z, e):
    """Per-column ``sum_i e_i Z_ik`` and ``sum_i e_i**2 Z_ik**2``."""
    Z = np.asarray(Z, dtype=float)
    e = np.asarray(e, dtype=float)
    if e.shape[0] != Z.shape[0]:
        raise ValueError("Z and e must have the same number of rows")
    return e @ Z, (e * e) @ (Z * Z)
