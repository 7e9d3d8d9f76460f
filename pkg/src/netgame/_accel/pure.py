"""Numpy implementations of the hot kernels.

These are the fallback twins of the Cython module ``_kernels``; both
implement the same algorithms step for step so results agree to rounding.
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"


def project_budget_box(v, beta, tol=1e-9):
    """Euclidean projection onto {m in [0,1]^n : sum(m) = beta}.

    Bisection on the shift tau in m_j = clip(v_j - tau, 0, 1); the sum of the
    clipped vector is continuous and nonincreasing in tau. A final equal
    shift on the strictly interior coordinates removes the residual budget
    error. The caller guarantees 0 <= beta <= n.
    """
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    if n == 1:
        return np.array([min(max(beta, 0.0), 1.0)])
    lo = float(v.min()) - 1.0
    hi = float(v.max())
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        s = float(np.clip(v - mid, 0.0, 1.0).sum())
        if s > beta:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, abs(lo), abs(hi)):
            break
    m = np.clip(v - 0.5 * (lo + hi), 0.0, 1.0)
    free = (m > 0.0) & (m < 1.0)
    nfree = int(free.sum())
    if nfree:
        m[free] += (beta - float(m.sum())) / nfree
        m = np.clip(m, 0.0, 1.0)
    return m


def pairwise_sqdist(u):
    """N x N matrix of squared Euclidean distances between rows of u."""
    u = np.asarray(u, dtype=float)
    sq = np.einsum("ij,ij->i", u, u)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (u @ u.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2
