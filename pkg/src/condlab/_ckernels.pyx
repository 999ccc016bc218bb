# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Monte Carlo accumulation kernels (see _pykernels for the contract).

The matrix product goes through BLAS (numpy) and the per-sample norms and
powers are fused here. The mean/m2 reduction uses numpy's pairwise sum.
Integer p avoids ``pow``.
"""
import numpy as np
from libc.math cimport pow, sqrt


cdef inline double _half_power(double x2, double p, int kind, int k) noexcept nogil:
    # x2 ** (p / 2); kind 0: general, 1: p = 2k, 2: p = 2k + 1
    cdef double out
    cdef int i
    if kind == 0:
        return pow(x2, 0.5 * p)
    out = sqrt(x2) if kind == 2 else 1.0
    for i in range(k):
        out *= x2
    return out


cdef inline void _power_plan(double p, int* kind, int* k):
    if p == <int>p and 1.0 <= p <= 64.0:
        k[0] = (<int>p) // 2
        kind[0] = 1 if (<int>p) % 2 == 0 else 2
    else:
        kind[0] = 0
        k[0] = 0


cdef tuple _two_pass(double[::1] vals):
    # numpy's pairwise sum: a plain running sum drifts by ~s*eps, which shows
    # on constant integrands
    cdef Py_ssize_t s = vals.shape[0]
    if s == 0:
        return 0, 0.0, 0.0
    v = np.asarray(vals)
    mean = float(np.sum(v)) / s
    d = v - mean
    return int(s), mean, float(d @ d)


def sphere_power_stats(matrix, draws, double p):
    M = np.ascontiguousarray(matrix, dtype=np.float64)
    cdef const double[:, ::1] G = np.ascontiguousarray(draws, dtype=np.float64)
    if M.shape[1] != G.shape[1]:
        raise ValueError("matrix and draws disagree on input dimension")
    cdef const double[:, ::1] Y = np.ascontiguousarray(np.asarray(G) @ M.T)
    cdef Py_ssize_t s = G.shape[0], m = G.shape[1], n = Y.shape[1]
    cdef Py_ssize_t i, j
    cdef double g2, y2
    cdef int kind, k
    # wide inputs: numpy's vectorized row norms beat the scalar loop
    cdef bint wide = m >= 64
    cdef const double[::1] G2 = np.einsum("ij,ij->i", G, G) if wide else np.empty(0)
    _power_plan(p, &kind, &k)
    cdef double[::1] vals = np.empty(s)
    with nogil:
        for i in range(s):
            if wide:
                g2 = G2[i]
            else:
                g2 = 0.0
                for j in range(m):
                    g2 += G[i, j] * G[i, j]
            y2 = 0.0
            for j in range(n):
                y2 += Y[i, j] * Y[i, j]
            vals[i] = _half_power(y2 / g2, p, kind, k)
    return _two_pass(vals)


def gaussian_power_stats(weights, draws, double p):
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[:, ::1] G = np.ascontiguousarray(draws, dtype=np.float64)
    cdef Py_ssize_t s = G.shape[0], n = G.shape[1]
    cdef Py_ssize_t i, j
    cdef double q
    cdef int kind, k
    if w.shape[0] != n:
        raise ValueError("weights and draws disagree on dimension")
    _power_plan(p, &kind, &k)
    cdef double[::1] vals = np.empty(s)
    with nogil:
        for i in range(s):
            q = 0.0
            for j in range(n):
                q += w[j] * G[i, j] * G[i, j]
            vals[i] = _half_power(q, p, kind, k)
    return _two_pass(vals)
