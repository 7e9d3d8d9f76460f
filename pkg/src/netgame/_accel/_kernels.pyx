# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; algorithmic twins of ``netgame._accel.pure``."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


def project_budget_box(v, double beta, double tol=1e-9):
    """Euclidean projection onto {m in [0,1]^n : sum(m) = beta}.

    Same bisection-on-tau scheme as the pure twin, including the final equal
    shift on interior coordinates. The caller guarantees 0 <= beta <= n.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t n = vv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double lo, hi, mid, s, x, b, shift
    cdef Py_ssize_t i, it, nfree

    if n == 1:
        b = beta
        if b < 0.0:
            b = 0.0
        elif b > 1.0:
            b = 1.0
        out[0] = b
        return out

    lo = vv[0]
    hi = vv[0]
    for i in range(1, n):
        if vv[i] < lo:
            lo = vv[i]
        if vv[i] > hi:
            hi = vv[i]
    lo = lo - 1.0

    for it in range(100):
        mid = 0.5 * (lo + hi)
        s = 0.0
        for i in range(n):
            x = vv[i] - mid
            if x < 0.0:
                x = 0.0
            elif x > 1.0:
                x = 1.0
            s += x
        if s > beta:
            lo = mid
        else:
            hi = mid
        b = 1.0
        if abs(lo) > b:
            b = abs(lo)
        if abs(hi) > b:
            b = abs(hi)
        if hi - lo <= 1e-15 * b:
            break

    mid = 0.5 * (lo + hi)
    s = 0.0
    nfree = 0
    for i in range(n):
        x = vv[i] - mid
        if x < 0.0:
            x = 0.0
        elif x > 1.0:
            x = 1.0
        out[i] = x
        s += x
        if 0.0 < x < 1.0:
            nfree += 1
    if nfree > 0:
        shift = (beta - s) / nfree
        for i in range(n):
            if 0.0 < out[i] < 1.0:
                x = out[i] + shift
                if x < 0.0:
                    x = 0.0
                elif x > 1.0:
                    x = 1.0
                out[i] = x
    return out


def pairwise_sqdist(u):
    """N x N matrix of squared Euclidean distances between rows of u."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = uu.shape[0]
    cdef Py_ssize_t d = uu.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((n, n), dtype=np.float64)
    cdef Py_ssize_t i, j, k
    cdef double acc, diff
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                diff = uu[i, k] - uu[j, k]
                acc += diff * diff
            out[i, j] = acc
            out[j, i] = acc
    return out
