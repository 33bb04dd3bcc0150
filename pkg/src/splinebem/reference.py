"""Brute-force reference integrals.

Independent oracle used by the tests and the accuracy harness: composite
Gauss-Legendre with singularity subtraction for log-kernel integrals, on a
panel mesh split at the singular point and geometrically graded toward it.
Nothing here shares code with the closed-form moment path it validates.
"""

from __future__ import annotations

import numpy as np

from .kernels import CLOSED_CURVE, OPEN_ARC
from .splines import SplineSpace

_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}

_TAIL_FACTOR = 1e-10  # innermost graded panel width, relative to the span


def gauss_nodes(order):
    if order not in _GAUSS_CACHE:
        _GAUSS_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GAUSS_CACHE[order]


def composite_gauss(f, edges, order):
    """Composite Gauss-Legendre over consecutive panel edges; f vectorized."""
    x, w = gauss_nodes(order)
    edges = np.asarray(edges, dtype=np.float64)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        total += half * np.sum(w * f(mid + half * x))
    return float(total)


def _one_side(f, c, d0, d1, sign, wmin, order):
    # integral of f(c + sign*d) * log(d) for d in [d0, d1]
    if d1 <= d0:
        return 0.0
    x, w = gauss_nodes(order)
    total = 0.0
    d = d0
    if d < wmin:
        hi = min(wmin, d1)
        anti = lambda y: y * np.log(y) - y if y > 0.0 else 0.0
        total += float(f(np.array([c + sign * hi]))[0]) * (anti(hi) - anti(d))
        d = hi
    edges = [d]
    while edges[-1] < d1:
        edges.append(min(2.0 * edges[-1], d1))
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        dd = mid + half * x
        total += half * np.sum(w * f(c + sign * dd) * np.log(dd))
    return total


def log_kernel_integral(f, lo, hi, c, order=20):
    """int_lo^hi f(t) log|t-c| dt with c anywhere (graded panels + tail)."""
    if hi <= lo:
        return 0.0
    wmin = _TAIL_FACTOR * (hi - lo)
    if c <= lo:
        return _one_side(f, c, lo - c, hi - c, +1, wmin, order)
    if c >= hi:
        return _one_side(f, c, c - hi, c - lo, -1, wmin, order)
    return _one_side(f, c, 0.0, c - lo, -1, wmin, order) + _one_side(
        f, c, 0.0, hi - c, +1, wmin, order
    )


def _plain_log_integral(lo, hi, c):
    # elementary antiderivative of log|t-c|: (t-c) log|t-c| - (t-c)
    def anti(x):
        y = x - c
        if y == 0.0:
            return 0.0
        return y * np.log(abs(y)) - y

    return anti(hi) - anti(lo)


def _shifts_and_const(s, kind, gamma):
    if kind == OPEN_ARC:
        return (s,), 0.0
    if gamma is None:
        raise ValueError("closed-curve integrals need gamma")
    return (s, s - gamma, s + gamma), -2.0 * np.log(gamma)


def _support_edges(space: SplineSpace, k):
    lo, hi = space.clipped_support(k)
    bps = space.breakpoints()
    inner = bps[(bps > lo + 1e-14) & (bps < hi - 1e-14)]
    return np.concatenate([[lo], inner, [hi]])


def regular_basis_integral(space: SplineSpace, k, g=None, order=20, refine=1):
    """Reference value of int B_k(t) g(t) dt over the clipped support."""
    g = g or (lambda t: np.ones_like(t))
    edges = _support_edges(space, k)
    if refine > 1:
        edges = np.unique(
            np.concatenate(
                [np.linspace(a, b, refine + 1) for a, b in zip(edges[:-1], edges[1:])]
            )
        )
    return composite_gauss(lambda t: space.basis_on(k, t) * g(t), edges, order)


def singular_basis_integral(space: SplineSpace, k, s, kind=OPEN_ARC, gamma=None, g=None, order=20):
    """Reference value of int K2(s,t) B_k(t) g(t) dt over the clipped support.

    Singularity-subtracted form: the value of B_k*g at s times the elementary
    integral of the kernel, plus the graded-panel quadrature of the subtracted
    (continuous) remainder, one log factor at a time.
    """
    g = g or (lambda t: np.ones_like(t))
    lo_k, hi_k = space.clipped_support(k)
    edges = _support_edges(space, k)
    shifts, const = _shifts_and_const(s, kind, gamma)

    if lo_k <= s <= hi_k:
        gs = float(space.basis_on(k, np.array([s]))[0] * g(np.array([s]))[0])
    else:
        gs = 0.0

    def fsub(t):
        return space.basis_on(k, t) * g(t) - gs

    total = 0.0
    for x0, x1 in zip(edges[:-1], edges[1:]):
        for c in shifts:
            total += log_kernel_integral(fsub, x0, x1, c, order)
        if const != 0.0:
            total += const * composite_gauss(fsub, [x0, x1], order)
    if gs != 0.0:
        kernel_int = 0.0
        for x0, x1 in zip(edges[:-1], edges[1:]):
            for c in shifts:
                kernel_int += _plain_log_integral(x0, x1, c)
            kernel_int += const * (x1 - x0)
        total += gs * kernel_int
    return total
