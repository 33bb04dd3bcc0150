"""Benchmark problem presets: parabola arc (exterior), circle and S-curve
(interior), plus the S-curve variant with doubled initial knots."""

from __future__ import annotations

import numpy as np

from .galerkin import EXTERIOR_INDIRECT, INTERIOR_DIRECT, BoundaryProblem
from .splines import (
    AnalyticCurve,
    CurveGeometry,
    SplineSpace,
    circle_map,
    periodic_pairing,
)

PRESET_NAMES = ("parabola", "circle", "s-curve", "s-curve-double-knot")


# -- geometries ---------------------------------------------------------


def parabola_geometry() -> CurveGeometry:
    space = SplineSpace.from_knots([-1, -1, -1, 1, 1, 1], 2)
    ctrl = np.array([[-1.0, 0.0], [0.0, 2.0], [1.0, 0.0]])
    return CurveGeometry(space, ctrl)


def fit_periodic_control(space: SplineSpace, analytic: AnalyticCurve) -> np.ndarray:
    """Least-squares control net for an analytic closed curve (descriptive
    B-form companion of an analytic geometry)."""
    ts = np.linspace(space.a, space.b, 25 * space.n_physical, endpoint=False)
    target = analytic.evaluate(ts, 0)[:, 0, :]
    pmap = periodic_pairing(space)
    coll = space.collocation(ts)
    phys = np.zeros((ts.size, space.n_physical))
    for j, pj in enumerate(pmap):
        phys[:, pj] += coll[:, j]
    sol, *_ = np.linalg.lstsq(phys, target, rcond=None)
    return sol[pmap]


def circle_geometry(radius=0.5, n_elements=6) -> CurveGeometry:
    """Circle of the given radius on [-1, 1]; the analytic map drives the
    evaluations, the fitted control net documents the B-form companion."""
    analytic = circle_map(radius)
    space = SplineSpace.periodic_uniform(-1.0, 1.0, n_elements, 3)
    return CurveGeometry(space, fit_periodic_control(space, analytic), analytic=analytic)


_S_CURVE_CONTROL = np.array(
    [
        [3.0, 3.2],
        [4.0, 2.2],
        [7.0, 4.0],
        [6.5, 5.8],
        [5.2, 7.3],
        [7.3, 8.5],
        [7.1, 9.2],
        [6.4, 9.5],
        [3.8, 8.0],
        [4.7, 6.6],
        [5.3, 5.0],
        [3.0, 4.3],
        [3.0, 3.2],
        [4.0, 2.2],
        [7.0, 4.0],
    ]
)


def s_curve_geometry() -> CurveGeometry:
    space = SplineSpace.from_knots(np.linspace(-1.5, 1.5, 19), 3, kind="periodic")
    return CurveGeometry(space, _S_CURVE_CONTROL)


# -- data and exact solutions --------------------------------------------


def parabola_dirichlet(s):
    """Dirichlet datum of the exterior parabola problem in parameter space.

    Bounded on [-1, 1] but with unbounded derivative at the endpoints; the
    coefficient of each boundary log factor vanishes there, so those terms
    are extended by their zero limit.
    """
    s = np.asarray(s, dtype=np.float64)
    term1 = -(7 - 9 * s + 4 * s**3) * np.log(2 + 2 * s + s * s)
    term1 -= (7 + 9 * s - 4 * s**3) * np.log(2 - 2 * s + s * s)
    mid = (14 + 24 * s * s) / (9 * np.pi)
    with np.errstate(divide="ignore", invalid="ignore"):
        left = np.where(1 + s > 0, -(7 + 3 * s + 4 * s**3) * np.log(np.maximum(1 + s, 1e-300)), 0.0)
        right = np.where(1 - s > 0, -(7 - 3 * s - 4 * s**3) * np.log(np.maximum(1 - s, 1e-300)), 0.0)
    arc = -(-1 + 12 * s * s) * np.arctan2(2.0, s * s)
    return term1 / (12 * np.pi) + mid + (left + right + arc) / (6 * np.pi)


def parabola_flux(s):
    s = np.asarray(s, dtype=np.float64)
    return np.sqrt(1.0 + 4.0 * s * s)


def circle_dirichlet(s):
    return 0.5 * np.cos(np.pi * np.asarray(s, dtype=np.float64))


def circle_flux(s):
    return np.cos(np.pi * np.asarray(s, dtype=np.float64))


def _s_curve_dirichlet(geom):
    # u_D(x, y) = x + y pulled back through the boundary map
    def datum(s):
        pts = geom.evaluate(s, 0)[:, 0, :]
        return pts[:, 0] + pts[:, 1]

    return datum


def _s_curve_flux(geom):
    # exact flux of u = x + y: normal dotted with (1, 1)
    def flux(s):
        der = geom.evaluate(s, 1)[:, 1, :]
        jac = np.hypot(der[:, 0], der[:, 1])
        return (-der[:, 0] + der[:, 1]) / jac

    return flux


# -- discrete spaces per refinement level ----------------------------------


def _double_knot_space(level: int) -> SplineSpace:
    """Cubic periodic space, doubled knots on the initial breakpoints and
    simple knots on everything inserted by refinement."""
    n_elem = 12 * 2**level
    values = -1.0 + 2.0 * np.arange(n_elem) / n_elem
    step = 2**level
    mults = np.where(np.arange(n_elem) % step == 0, 2, 1)
    return SplineSpace.periodic_from_breakpoints(values, mults, 3, 2.0)


def discrete_space(name: str, level: int, degree: int | None = None) -> SplineSpace:
    if name == "parabola":
        return SplineSpace.open_uniform(-1.0, 1.0, 10 * 2**level, degree or 2)
    if name == "circle":
        return SplineSpace.periodic_uniform(-1.0, 1.0, 6 * 2**level, degree or 3)
    if name == "s-curve":
        return SplineSpace.periodic_uniform(-1.0, 1.0, 12 * 2**level, degree or 3)
    if name == "s-curve-double-knot":
        if degree not in (None, 3):
            raise ValueError("the double-knot preset is cubic")
        return _double_knot_space(level)
    raise ValueError(f"unknown preset {name!r}; choose one of {PRESET_NAMES}")


def make_problem(name: str, level: int = 0, degree: int | None = None) -> BoundaryProblem:
    """Problem preset at one dyadic refinement level."""
    space = discrete_space(name, level, degree)
    if name == "parabola":
        return BoundaryProblem(
            parabola_geometry(), EXTERIOR_INDIRECT, parabola_dirichlet, space, parabola_flux
        )
    if name == "circle":
        return BoundaryProblem(
            circle_geometry(), INTERIOR_DIRECT, circle_dirichlet, space, circle_flux
        )
    geom = s_curve_geometry()
    return BoundaryProblem(
        geom, INTERIOR_DIRECT, _s_curve_dirichlet(geom), space, _s_curve_flux(geom)
    )
