# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pair-sum and column-score kernels.

Semantics match ``hdivtest._kernels_py`` exactly; see that module for the
definitions.
"""
import numpy as np


def pair_sums(const double[:, ::1] P, const double[::1] e):
    cdef Py_ssize_t n = e.shape[0]
    cdef Py_ssize_t i, j
    cdef double num = 0.0, den = 0.0
    cdef double ei, t, row_num, row_den
    if P.shape[0] != n or P.shape[1] != n:
        raise ValueError("P must be n x n with n = len(e)")
    with nogil:
        for i in range(n):
            ei = e[i]
            if ei == 0.0:
                continue
            row_num = 0.0
            row_den = 0.0
            for j in range(i + 1, n):
                t = P[i, j] * e[j]
                row_num = row_num + t
                row_den = row_den + t * t
            num = num + ei * row_num
            den = den + ei * ei * row_den
    return 2.0 * num, 2.0 * den


def column_scores(const double[:, ::1] Z, const double[::1] e):
    cdef Py_ssize_t n = Z.shape[0]
    cdef Py_ssize_t K = Z.shape[1]
    cdef Py_ssize_t i, k
    cdef double ei, ei2, z
    if e.shape[0] != n:
        raise ValueError("Z and e must have the same number of rows")
    num_arr = np.zeros(K)
    den_arr = np.zeros(K)
    cdef double[::1] num = num_arr
    cdef double[::1] den = den_arr
    with nogil:
        for i in range(n):
            ei = e[i]
            if ei == 0.0:
                continue
            ei2 = ei * ei
            for k in range(K):
                z = Z[i, k]
                num[k] = num[k] + ei * z
                den[k] = den[k] + ei2 * z * z
    return num_arr, den_arr
