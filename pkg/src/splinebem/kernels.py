"""Kernel machinery for the parametrized 2D Laplace log kernel.

The kernel log|F(s)-F(t)| splits into a smooth part k1 and the purely
parametric weakly singular part k2 = log(delta).  The singularity carrier
delta is |s-t| on open arcs; on closed curves it is
|s-t| |(s-t)^2 - gamma^2| / gamma^2, which also removes the periodic-image
singularity at |s-t| = gamma.  k1 (and its t-derivative, needed by the
Hermite quadrature variant) are total functions: inside a small patch around
each removable singularity a first-order Taylor form replaces the unstable
quotient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .splines import PERIODIC, CurveGeometry

OPEN_ARC = "open-arc"
CLOSED_CURVE = "closed-curve"

PATCH_RADIUS_FACTOR = 1e-6  # of the parametric interval length, for k1
DLP_PATCH_FACTOR = 1e-5


def _check_kind(kind):
    if kind not in (OPEN_ARC, CLOSED_CURVE):
        raise ValueError(f"unknown domain kind {kind!r}")


def delta(s, t, kind, gamma=None):
    """Singularity carrier: |s-t| (open) or |s-t||(s-t)^2-gamma^2|/gamma^2."""
    _check_kind(kind)
    u = np.asarray(s, dtype=np.float64) - np.asarray(t, dtype=np.float64)
    if kind == OPEN_ARC:
        return np.abs(u)
    if gamma is None:
        raise ValueError("closed-curve delta needs gamma")
    return np.abs(u) * np.abs(u * u - gamma * gamma) / (gamma * gamma)


def k2(s, t, kind, gamma=None):
    """log(delta); the weakly singular kernel part.

    For closed curves this equals log|s-t| + log|s-t-gamma| + log|s-t+gamma|
    - 2 log(gamma), the decomposition the moment engine integrates term by
    term.
    """
    d = delta(s, t, kind, gamma)
    if np.any(d == 0.0):
        raise ValueError("k2 evaluated on the singular set (delta = 0)")
    return np.log(d)


@dataclass(frozen=True)
class KernelSplit:
    """Geometry plus domain kind; owns the regularized kernel parts."""

    geometry: CurveGeometry
    kind: str

    def __post_init__(self):
        _check_kind(self.kind)
        if self.kind == CLOSED_CURVE and self.geometry.space.kind != PERIODIC:
            raise ValueError("closed-curve split needs a periodic geometry space")

    @property
    def gamma(self) -> float:
        return self.geometry.interval_length

    @property
    def patch_radius(self) -> float:
        return PATCH_RADIUS_FACTOR * self.gamma


def _tables(geometry, ts, nders):
    vals = geometry.evaluate(ts, nders)
    return vals


def _wrapped(u, gamma):
    return u - gamma * np.round(u / gamma)


def k1_grid(split: KernelSplit, s_vals, t_vals) -> np.ndarray:
    """Regular kernel part on the grid of sources x targets."""
    s_vals = np.atleast_1d(np.asarray(s_vals, dtype=np.float64))
    t_vals = np.atleast_1d(np.asarray(t_vals, dtype=np.float64))
    geom = split.geometry
    gamma = split.gamma
    eps = split.patch_radius
    fs = _tables(geom, s_vals, 0)[:, 0, :]
    ft = _tables(geom, t_vals, 2)
    f0, f1, f2 = ft[:, 0, :], ft[:, 1, :], ft[:, 2, :]
    jsq = f1[:, 0] ** 2 + f1[:, 1] ** 2
    logj = 0.5 * np.log(jsq)
    curv = f1[:, 0] * f2[:, 0] + f1[:, 1] * f2[:, 1]  # F' . F''

    u = s_vals[:, None] - t_vals[None, :]
    dx = fs[:, None, 0] - f0[None, :, 0]
    dy = fs[:, None, 1] - f0[None, :, 1]
    diffsq = dx * dx + dy * dy

    if split.kind == OPEN_ARC:
        near = np.abs(u) < eps
        with np.errstate(divide="ignore", invalid="ignore"):
            direct = 0.5 * np.log(diffsq) - np.log(np.abs(u))
        patch = logj[None, :] + u * (curv / (2.0 * jsq))[None, :]
        return np.where(near, patch, direct)

    uw = _wrapped(u, gamma)
    near = np.abs(uw) < eps
    with np.errstate(divide="ignore", invalid="ignore"):
        logd = (
            np.log(np.abs(u))
            + np.log(np.abs(u - gamma))
            + np.log(np.abs(u + gamma))
            - 2.0 * np.log(gamma)
        )
        direct = 0.5 * np.log(diffsq) - logd
    diag = np.abs(u) <= 0.5 * gamma
    slope = (curv / (2.0 * jsq))[None, :]
    patch_diag = logj[None, :] + uw * slope
    # the delta correction flips sign between the two periodic images
    patch_image = (logj - np.log(2.0))[None, :] + uw * (slope - np.sign(u) * 1.5 / gamma)
    patch = np.where(diag, patch_diag, patch_image)
    return np.where(near, patch, direct)


def k1(s, t, split: KernelSplit) -> float:
    """Regular part of the kernel at one point pair (total function)."""
    return float(k1_grid(split, [s], [t])[0, 0])


def k1_dt_grid(split: KernelSplit, s_vals, t_vals) -> np.ndarray:
    """d/dt of the regular kernel part (used by the Hermite variant)."""
    s_vals = np.atleast_1d(np.asarray(s_vals, dtype=np.float64))
    t_vals = np.atleast_1d(np.asarray(t_vals, dtype=np.float64))
    geom = split.geometry
    gamma = split.gamma
    eps = split.patch_radius
    fs = _tables(geom, s_vals, 0)[:, 0, :]
    ft = _tables(geom, t_vals, 2)
    f0, f1, f2 = ft[:, 0, :], ft[:, 1, :], ft[:, 2, :]
    jsq = f1[:, 0] ** 2 + f1[:, 1] ** 2
    curv = f1[:, 0] * f2[:, 0] + f1[:, 1] * f2[:, 1]

    u = s_vals[:, None] - t_vals[None, :]
    dx = fs[:, None, 0] - f0[None, :, 0]
    dy = fs[:, None, 1] - f0[None, :, 1]
    diffsq = dx * dx + dy * dy
    dot_dft = dx * f1[None, :, 0] + dy * f1[None, :, 1]  # (F(s)-F(t)) . F'(t)

    limit = (curv / (2.0 * jsq))[None, :]
    if split.kind == OPEN_ARC:
        near = np.abs(u) < eps
        with np.errstate(divide="ignore", invalid="ignore"):
            direct = -dot_dft / diffsq + 1.0 / u
        return np.where(near, np.broadcast_to(limit, u.shape), direct)

    uw = _wrapped(u, gamma)
    near = np.abs(uw) < eps
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = -dot_dft / diffsq + 1.0 / u + 1.0 / (u - gamma) + 1.0 / (u + gamma)
        diag = np.abs(u) <= 0.5 * gamma
        # the singular reciprocal cancels against the kernel term; keep the
        # two regular reciprocals evaluated exactly
        patch_diag = limit + 1.0 / (u - gamma) + 1.0 / (u + gamma)
        patch_image = limit + 1.0 / u + np.where(u > 0, 1.0 / (u + gamma), 1.0 / (u - gamma))
    patch = np.where(diag, patch_diag, patch_image)
    return np.where(near, patch, direct)


def k1_dt(s, t, split: KernelSplit) -> float:
    return float(k1_dt_grid(split, [s], [t])[0, 0])


def dlp_grid(geometry: CurveGeometry, s_vals, t_vals) -> np.ndarray:
    """Double-layer kernel K(s,t) = d/dn_t log|F(s)-F(t)| * J(t) on a grid.

    Counterclockwise boundary with the exterior normal from rotating F' by
    -pi/2; regular everywhere for C^2 geometry, with the curvature-type
    diagonal value half of (F1' F2'' - F2' F1'')/J^2.
    """
    s_vals = np.atleast_1d(np.asarray(s_vals, dtype=np.float64))
    t_vals = np.atleast_1d(np.asarray(t_vals, dtype=np.float64))
    gamma = geometry.interval_length
    eps = DLP_PATCH_FACTOR * gamma
    fs = geometry.evaluate(s_vals, 0)[:, 0, :]
    ft = geometry.evaluate(t_vals, 3)
    f0, f1, f2, f3 = ft[:, 0, :], ft[:, 1, :], ft[:, 2, :], ft[:, 3, :]
    jsq = f1[:, 0] ** 2 + f1[:, 1] ** 2
    curv = f1[:, 0] * f2[:, 0] + f1[:, 1] * f2[:, 1]
    w2 = f1[:, 0] * f2[:, 1] - f1[:, 1] * f2[:, 0]
    w3 = f1[:, 0] * f3[:, 1] - f1[:, 1] * f3[:, 0]

    u = s_vals[:, None] - t_vals[None, :]
    if geometry.space.kind == PERIODIC:
        uw = _wrapped(u, gamma)
    else:
        uw = u
    ddx = f0[None, :, 0] - fs[:, None, 0]  # F(t) - F(s)
    ddy = f0[None, :, 1] - fs[:, None, 1]
    num = ddx * f1[None, :, 1] - ddy * f1[None, :, 0]
    den = ddx * ddx + ddy * ddy
    near = np.abs(uw) < eps
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = num / den
    limit = (w2 / (2.0 * jsq))[None, :]
    slope = (w3 / (6.0 * jsq) - w2 * curv / (2.0 * jsq * jsq))[None, :]
    patch = limit + uw * slope
    return np.where(near, patch, direct)


def dlp_kernel(s, t, geometry: CurveGeometry) -> float:
    """Double-layer kernel value, with the removable diagonal handled."""
    return float(dlp_grid(geometry, [s], [t])[0, 0])


def dlp_point(x, t_vals, geometry: CurveGeometry) -> np.ndarray:
    """Double-layer kernel for a field point x off the boundary."""
    t_vals = np.atleast_1d(np.asarray(t_vals, dtype=np.float64))
    ft = geometry.evaluate(t_vals, 1)
    f0, f1 = ft[:, 0, :], ft[:, 1, :]
    ddx = f0[:, 0] - x[0]
    ddy = f0[:, 1] - x[1]
    den = ddx * ddx + ddy * ddy
    return (ddx * f1[:, 1] - ddy * f1[:, 0]) / den
