"""Pure-numpy fallback implementations of the hot kernels.

Same contracts as ``_hot_numba``; selected via SPLINEBEM_BACKEND=numpy.
"""

from __future__ import annotations

import numpy as np


def _find_span(knots, degree, nbasis, t):
    span = int(np.searchsorted(knots, t, side="right")) - 1
    span = min(max(span, degree), nbasis - 1)
    while span > degree and knots[span] == knots[span + 1]:
        span -= 1
    return span


def _ders_one(knots, degree, span, t, nders):
    ndu = np.empty((degree + 1, degree + 1))
    ndu[0, 0] = 1.0
    left = np.empty(degree + 1)
    right = np.empty(degree + 1)
    for j in range(1, degree + 1):
        left[j] = t - knots[span + 1 - j]
        right[j] = knots[span + j] - t
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved
    out = np.zeros((nders + 1, degree + 1))
    out[0, :] = ndu[:, degree]
    maxk = min(nders, degree)
    a = np.zeros((2, degree + 1))
    for r in range(degree + 1):
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for k in range(1, maxk + 1):
            dd = 0.0
            rk = r - k
            pk = degree - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                dd = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else degree - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                dd += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                dd += a[s2, k] * ndu[r, pk]
            out[k, r] = dd
            s1, s2 = s2, s1
    rr = float(degree)
    for k in range(1, maxk + 1):
        out[k, :] *= rr
        rr *= degree - k
    return out


def tabulate_ders(knots, degree, nbasis, ts, nders):
    """Nonzero B-spline basis values and derivatives at each point."""
    npts = ts.shape[0]
    spans = np.empty(npts, np.int64)
    ders = np.zeros((npts, nders + 1, degree + 1))
    for p in range(npts):
        span = _find_span(knots, degree, nbasis, ts[p])
        spans[p] = span
        ders[p] = _ders_one(knots, degree, span, ts[p], nders)
    return spans, ders


def _antiderivatives(x, c, q):
    # vector over r = 0..q of the antiderivative of t^r log|t-c| at x
    r = np.arange(q + 1)
    y = x - c
    if y == 0.0:
        lead = np.zeros(q + 1)
    else:
        lead = (x ** (r + 1) - c ** (r + 1)) / (r + 1) * np.log(abs(y))
    cp = c ** r
    xp = x ** (r + 1) / (r + 1)
    tails = np.convolve(cp, xp)[: q + 1]
    return lead - tails / (r + 1)


def log_power_moments(a, b, c, q):
    """Exact values of int_a^b t^r log|t-c| dt for r = 0..q."""
    return _antiderivatives(b, c, q) - _antiderivatives(a, c, q)


def accumulate_moment_rows(mids, halfs, firsts, coef, dim, shifts, const_factor):
    """Moments of every basis function against the log kernel (see numba twin)."""
    nspans = mids.shape[0]
    qp1 = coef.shape[1]
    q = qp1 - 1
    row = np.zeros(dim)
    for e in range(nspans):
        h = halfs[e]
        mid = mids[e]
        mom = np.zeros(qp1)
        for s in shifts:
            mom += log_power_moments(-h, h, s - mid, q)
        if const_factor != 0.0:
            r = np.arange(0, qp1, 2)
            mom[r] += const_factor * 2.0 * h ** (r + 1) / (r + 1)
        f = firsts[e]
        row[f : f + qp1] += coef[e].T @ mom
    return row
