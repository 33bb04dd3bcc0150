"""Numba-jitted implementations of the hot kernels.

Mirrors the signatures in ``_hot_numpy``; see ``backend`` for selection.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _find_span(knots, degree, nbasis, t):
    # last index mu with knots[mu] <= t < knots[mu+1], clamped so the span is
    # inside the domain and has nonzero width (right closure at b)
    lo, hi = 0, knots.shape[0]
    while lo < hi:
        mid = (lo + hi) // 2
        if knots[mid] <= t:
            lo = mid + 1
        else:
            hi = mid
    span = lo - 1
    if span > nbasis - 1:
        span = nbasis - 1
    if span < degree:
        span = degree
    while span > degree and knots[span] == knots[span + 1]:
        span -= 1
    return span


@njit(cache=True)
def tabulate_ders(knots, degree, nbasis, ts, nders):
    """Nonzero B-spline basis values and derivatives at each point.

    Returns (spans, ders) with ders[p, k, j] the k-th derivative of basis
    function ``spans[p] - degree + j`` at ``ts[p]``.
    """
    npts = ts.shape[0]
    spans = np.empty(npts, np.int64)
    ders = np.zeros((npts, nders + 1, degree + 1))
    ndu = np.zeros((degree + 1, degree + 1))
    a = np.zeros((2, degree + 1))
    left = np.zeros(degree + 1)
    right = np.zeros(degree + 1)
    maxk = nders if nders < degree else degree
    for p in range(npts):
        t = ts[p]
        span = _find_span(knots, degree, nbasis, t)
        spans[p] = span
        ndu[0, 0] = 1.0
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
        for j in range(degree + 1):
            ders[p, 0, j] = ndu[j, degree]
        for r in range(degree + 1):
            s1 = 0
            s2 = 1
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
                ders[p, k, r] = dd
                s1, s2 = s2, s1
        rr = float(degree)
        for k in range(1, maxk + 1):
            for j in range(degree + 1):
                ders[p, k, j] *= rr
            rr *= degree - k
    return spans, ders


@njit(cache=True)
def _antiderivative(x, c, r):
    # antiderivative of t^r log|t - c| evaluated at x, continuous across t = c
    # (the leading product is taken as 0 when x == c; improper integrals
    # through the singularity then come out right)
    y = x - c
    if y == 0.0:
        lead = 0.0
    else:
        lead = (x ** (r + 1) - c ** (r + 1)) / (r + 1) * np.log(abs(y))
    s = 0.0
    xp = x
    for j in range(r + 1):
        s += c ** (r - j) * xp / (j + 1)
        xp *= x
    return lead - s / (r + 1)


@njit(cache=True)
def log_power_moments(a, b, c, q):
    """Exact values of int_a^b t^r log|t-c| dt for r = 0..q."""
    out = np.empty(q + 1)
    for r in range(q + 1):
        out[r] = _antiderivative(b, c, r) - _antiderivative(a, c, r)
    return out


@njit(cache=True)
def accumulate_moment_rows(mids, halfs, firsts, coef, dim, shifts, const_factor):
    """Moments of every basis function against the log kernel.

    coef[e, r, j] is the coefficient of (t - mids[e])**r of basis function
    ``firsts[e] + j`` on span e.  The kernel is sum_s log|t - shifts[s]| plus
    ``const_factor`` (the closed-curve decomposition feeds three shifts and
    the -2 log(gamma) correction; open arcs feed one shift and 0).
    """
    nspans = mids.shape[0]
    qp1 = coef.shape[1]
    row = np.zeros(dim)
    mom = np.zeros(qp1)
    for e in range(nspans):
        h = halfs[e]
        mid = mids[e]
        for r in range(qp1):
            mom[r] = 0.0
        for si in range(shifts.shape[0]):
            cp = shifts[si] - mid
            for r in range(qp1):
                mom[r] += _antiderivative(h, cp, r) - _antiderivative(-h, cp, r)
        if const_factor != 0.0:
            for r in range(0, qp1, 2):
                mom[r] += const_factor * 2.0 * h ** (r + 1) / (r + 1)
        f = firsts[e]
        for j in range(qp1):
            acc = 0.0
            for r in range(qp1):
                acc += coef[e, r, j] * mom[r]
            row[f + j] += acc
    return row
