"""Spline quasi-interpolation quadrature for weakly singular boundary
integrals, with a 2D Laplace Galerkin BEM solver on spline curves."""

from .backend import BACKEND_NAME, USING_NUMBA
from .splines import (
    OPEN,
    PERIODIC,
    AnalyticCurve,
    CurveGeometry,
    KnotVector,
    SplineSpace,
    bspline_integral,
    circle_map,
    curve_eval,
    eval_basis,
    parametric_speed,
    periodic_pairing,
    product_coefficients,
    product_space,
)

__all__ = [
    "BACKEND_NAME",
    "USING_NUMBA",
    "OPEN",
    "PERIODIC",
    "AnalyticCurve",
    "CurveGeometry",
    "KnotVector",
    "SplineSpace",
    "bspline_integral",
    "circle_map",
    "curve_eval",
    "eval_basis",
    "parametric_speed",
    "periodic_pairing",
    "product_coefficients",
    "product_space",
]
