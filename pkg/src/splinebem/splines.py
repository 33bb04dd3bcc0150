"""Univariate B-spline spaces, boundary curves, spline products and exact
B-spline integrals.

Conventions: knots are stored as plain arrays (0-based indexing); basis i has
support [knots[i], knots[i+d+1]].  Span lookup is half-open with right closure
at the domain end b.  Periodic spaces keep the plain extended knot vector plus
a pairing map; evaluation wraps the parameter into [a, b) first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backend import tabulate_ders

OPEN = "open"
PERIODIC = "periodic"
# internal kind used by the assembly engine: a plain (neither clamped nor
# periodicity-checked) knot line for evaluating wrapped supports past b
PLAIN = "plain"

_KNOT_TOL = 1e-12


def _as_float_array(x):
    return np.ascontiguousarray(np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class KnotVector:
    """Nondecreasing knot sequence with degree and boundary kind."""

    knots: np.ndarray
    degree: int
    kind: str = OPEN

    def __post_init__(self):
        object.__setattr__(self, "knots", _as_float_array(self.knots))
        knots, d = self.knots, self.degree
        if d < 0:
            raise ValueError("degree must be nonnegative")
        if knots.ndim != 1 or knots.size < 2 * d + 2:
            raise ValueError("need at least 2*degree+2 knots")
        if np.any(np.diff(knots) < -_KNOT_TOL):
            raise ValueError("knots must be nondecreasing")
        if self.kind not in (OPEN, PERIODIC, PLAIN):
            raise ValueError(f"unknown knot vector kind {self.kind!r}")
        scale = max(knots[-1] - knots[0], 1.0)
        tol = _KNOT_TOL * scale
        _, counts = np.unique(np.round(knots / tol).astype(np.int64), return_counts=True)
        if counts.max() > d + 1:
            raise ValueError("knot multiplicity exceeds degree+1")
        n = self.dimension
        a, b = knots[d], knots[n]
        if self.kind == PLAIN:
            return
        if self.kind == OPEN:
            if np.any(np.abs(knots[: d + 1] - a) > tol) or np.any(
                np.abs(knots[n:] - b) > tol
            ):
                raise ValueError("open vector must clamp both ends")
        else:
            rho = self.rho
            lead = np.diff(knots[: 2 * rho + 1])
            trail = np.diff(knots[n - rho : n + rho + 1])
            if lead.size != trail.size or np.any(np.abs(lead - trail) > tol):
                raise ValueError("periodic vector violates the knot-difference pairing")

    @property
    def dimension(self) -> int:
        return self.knots.size - self.degree - 1

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots[self.degree]), float(self.knots[self.dimension])

    @property
    def start_multiplicity(self) -> int:
        a = self.knots[self.degree]
        scale = max(self.knots[-1] - self.knots[0], 1.0)
        return int(np.sum(np.abs(self.knots - a) <= _KNOT_TOL * scale))

    @property
    def rho(self) -> int:
        """Number of paired shape functions for periodic vectors."""
        return self.degree - self.start_multiplicity + 1


class SplineSpace:
    """Univariate B-spline space; owns basis evaluation."""

    def __init__(self, knot_vector: KnotVector):
        self.knot_vector = knot_vector
        self.knots = knot_vector.knots
        self.degree = knot_vector.degree
        self.kind = knot_vector.kind
        self.dimension = knot_vector.dimension
        self.a, self.b = knot_vector.domain

    # -- constructors -------------------------------------------------

    @classmethod
    def from_knots(cls, knots, degree, kind=OPEN):
        return cls(KnotVector(_as_float_array(knots), degree, kind))

    @classmethod
    def open_uniform(cls, a, b, n_elements, degree):
        interior = np.linspace(a, b, n_elements + 1)
        knots = np.concatenate([[a] * degree, interior, [b] * degree])
        return cls(KnotVector(knots, degree, OPEN))

    @classmethod
    def periodic_from_breakpoints(cls, values, mults, degree, period):
        """Periodic space from one period of breakpoints (first one = a).

        ``values`` lie in [a, a+period); the extended vector is a window of
        the periodically tiled sequence placed so a = t[degree].
        """
        values = _as_float_array(values)
        mults = np.asarray(mults, dtype=int)
        core = np.repeat(values, mults)
        full = np.concatenate([core - period, core, core + period])
        pos = core.size  # first occurrence of a in the middle block
        n = core.size + degree - mults[0] + 1  # dimension: M + rho
        window = full[pos - degree : pos - degree + n + degree + 1]
        return cls(KnotVector(window, degree, PERIODIC))

    @classmethod
    def periodic_uniform(cls, a, b, n_elements, degree):
        values = a + (b - a) * np.arange(n_elements) / n_elements
        return cls.periodic_from_breakpoints(values, np.ones(n_elements, int), degree, b - a)

    # -- basic queries ------------------------------------------------

    def support(self, i) -> tuple[float, float]:
        if not 0 <= i < self.dimension:
            raise IndexError(f"basis index {i} out of range")
        return float(self.knots[i]), float(self.knots[i + self.degree + 1])

    def clipped_support(self, i) -> tuple[float, float]:
        lo, hi = self.support(i)
        return max(lo, self.a), min(hi, self.b)

    def greville(self, i) -> float:
        return float(np.mean(self.knots[i + 1 : i + self.degree + 1]))

    def breakpoints(self) -> np.ndarray:
        """Distinct breakpoints inside the domain, endpoints included."""
        inside = self.knots[(self.knots >= self.a - _KNOT_TOL) & (self.knots <= self.b + _KNOT_TOL)]
        scale = max(self.b - self.a, 1.0)
        out = [inside[0]]
        for v in inside[1:]:
            if v - out[-1] > _KNOT_TOL * scale:
                out.append(v)
        return np.array(out)

    def interior_multiplicity(self, value) -> int:
        scale = max(self.b - self.a, 1.0)
        return int(np.sum(np.abs(self.knots - value) <= _KNOT_TOL * scale))

    @property
    def rho(self) -> int:
        return self.knot_vector.rho

    @property
    def n_physical(self) -> int:
        return self.dimension - self.rho if self.kind == PERIODIC else self.dimension

    def wrap(self, t: float) -> float:
        gamma = self.b - self.a
        return self.a + (t - self.a) % gamma

    # -- evaluation ---------------------------------------------------

    def tabulate(self, ts, nders=0):
        """Spans and nonzero basis derivatives at the given parameters.

        No periodic wrapping is applied; values at b are left limits.
        """
        ts = np.atleast_1d(_as_float_array(ts))
        return tabulate_ders(self.knots, self.degree, self.dimension, ts, nders)

    def eval_basis(self, i, t, deriv_order=0) -> float:
        """Value (or derivative) of one basis function at one parameter."""
        if not 0 <= i < self.dimension:
            raise IndexError(f"basis index {i} out of range")
        t = float(t)
        if self.kind == PERIODIC:
            t = self.wrap(t)
        elif not (self.a - _KNOT_TOL <= t <= self.b + _KNOT_TOL):
            raise ValueError(f"parameter {t} outside domain [{self.a}, {self.b}]")
        spans, ders = self.tabulate(np.array([t]), deriv_order)
        lo = spans[0] - self.degree
        if i < lo or i > spans[0]:
            return 0.0
        return float(ders[0, deriv_order, i - lo])

    def basis_on(self, i, ts, deriv_order=0) -> np.ndarray:
        """One basis function on an array of parameters (no wrapping)."""
        ts = np.atleast_1d(_as_float_array(ts))
        spans, ders = self.tabulate(ts, deriv_order)
        cols = i - (spans - self.degree)
        ok = (cols >= 0) & (cols <= self.degree)
        out = np.zeros(ts.size)
        out[ok] = ders[ok, deriv_order, cols[ok]]
        return out

    def collocation(self, ts, deriv_order=0) -> np.ndarray:
        """Dense matrix of all basis functions at the given parameters."""
        ts = np.atleast_1d(_as_float_array(ts))
        spans, ders = self.tabulate(ts, deriv_order)
        mat = np.zeros((ts.size, self.dimension))
        for p in range(ts.size):
            lo = spans[p] - self.degree
            mat[p, lo : lo + self.degree + 1] = ders[p, deriv_order]
        return mat

    def spline_value(self, coefficients, ts, deriv_order=0) -> np.ndarray:
        coefficients = np.asarray(coefficients, dtype=np.float64)
        return self.collocation(ts, deriv_order) @ coefficients

    # -- exact integrals and span tables -------------------------------

    def bspline_integral(self, k) -> float:
        """Exact integral of one B-spline over its support: |supp|/(d+1)."""
        lo, hi = self.support(k)
        return (hi - lo) / (self.degree + 1)

    def all_integrals(self) -> np.ndarray:
        d = self.degree
        return (self.knots[d + 1 :] - self.knots[: self.dimension]) / (d + 1)

    def span_table(self):
        """Per-span midpoints, halfwidths, first active index, and local
        polynomial coefficients about the midpoint (used by the moment engine).
        """
        bps = self.breakpoints()
        mids = 0.5 * (bps[:-1] + bps[1:])
        halfs = 0.5 * (bps[1:] - bps[:-1])
        spans, ders = self.tabulate(mids, self.degree)
        firsts = spans - self.degree
        fact = np.array([math.factorial(r) for r in range(self.degree + 1)], dtype=np.float64)
        coef = ders / fact[None, :, None]
        return mids, halfs, firsts.astype(np.int64), np.ascontiguousarray(coef)


def eval_basis(space: SplineSpace, i, t, deriv_order=0) -> float:
    return space.eval_basis(i, t, deriv_order)


def bspline_integral(space: SplineSpace, k) -> float:
    return space.bspline_integral(k)


def evaluation_extension(space: SplineSpace):
    """Extended plain-knot evaluation space for a periodic one.

    Appends one period of knots on the right, so the wrapped support of every
    paired shape function becomes a contiguous interval on which the trailing
    parametric representative is a single ordinary B-spline.  Returns the
    extended space and the representative parametric index of each physical
    degree of freedom.
    """
    if space.kind != PERIODIC:
        raise ValueError("only periodic spaces have an evaluation extension")
    gamma = space.b - space.a
    period = space.n_physical  # knots per period
    knots = space.knots
    ext = np.concatenate([knots, knots[-period:] + gamma])
    eval_space = SplineSpace(KnotVector(ext, space.degree, PLAIN))
    rho = space.rho
    nphys = space.n_physical
    reps = np.array(
        [space.dimension - rho + i if i < rho else i for i in range(nphys)], dtype=np.int64
    )
    return eval_space, reps


def periodic_pairing(space: SplineSpace) -> np.ndarray:
    """Map from parametric basis index to physical shape-function index.

    Open vectors map identically.  Periodic vectors fold the trailing rho
    functions onto the leading ones, so each pair (i, N-rho+i) accumulates
    into one physical degree of freedom.
    """
    n = space.dimension
    if space.kind != PERIODIC:
        return np.arange(n)
    nphys = space.n_physical
    out = np.arange(n)
    out[nphys:] -= nphys
    return out


def pairing_matrix(space: SplineSpace) -> np.ndarray:
    """0/1 matrix P with column sums accumulating parametric into physical."""
    pmap = periodic_pairing(space)
    mat = np.zeros((space.dimension, pmap.max() + 1))
    mat[np.arange(space.dimension), pmap] = 1.0
    return mat


# -- geometry curves ---------------------------------------------------


class AnalyticCurve:
    """Closed-form parametrization used in place of the B-form when the exact
    boundary is not a polynomial spline (circle preset)."""

    def __init__(self, evaluate):
        # evaluate(ts, nders) -> array (npts, nders+1, 2)
        self._evaluate = evaluate

    def evaluate(self, ts, nders):
        return self._evaluate(ts, nders)


def circle_map(radius=0.5):
    """CCW circle of the given radius over the parameter interval [-1, 1]."""

    def evaluate(ts, nders):
        ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
        out = np.empty((ts.size, nders + 1, 2))
        for k in range(nders + 1):
            amp = radius * np.pi**k
            out[:, k, 0] = amp * np.cos(np.pi * ts + 0.5 * k * np.pi)
            out[:, k, 1] = amp * np.sin(np.pi * ts + 0.5 * k * np.pi)
        return out

    return AnalyticCurve(evaluate)


class CurveGeometry:
    """Parametric boundary curve in B-form, optionally shadowed by an
    analytic map for geometries that are not exactly spline-representable."""

    def __init__(self, space: SplineSpace, control_points, analytic: AnalyticCurve | None = None):
        control_points = np.asarray(control_points, dtype=np.float64)
        if control_points.shape != (space.dimension, 2):
            raise ValueError(
                f"control net must be ({space.dimension}, 2), got {control_points.shape}"
            )
        if space.kind == PERIODIC:
            rho = space.rho
            nphys = space.n_physical
            if not np.allclose(control_points[:rho], control_points[nphys:], atol=1e-12):
                raise ValueError("periodic control net must repeat its first rho points")
        self.space = space
        self.control_points = control_points
        self.analytic = analytic

    @property
    def domain(self):
        return self.space.a, self.space.b

    @property
    def interval_length(self) -> float:
        return self.space.b - self.space.a

    def evaluate(self, ts, nders=0) -> np.ndarray:
        """Curve point and derivatives: array (npts, nders+1, 2)."""
        ts = np.atleast_1d(_as_float_array(ts))
        if self.space.kind == PERIODIC:
            ts = self.space.a + (ts - self.space.a) % self.interval_length
        if self.analytic is not None:
            return self.analytic.evaluate(ts, nders)
        spans, ders = self.space.tabulate(ts, nders)
        out = np.empty((ts.size, nders + 1, 2))
        for p in range(ts.size):
            lo = spans[p] - self.space.degree
            ctrl = self.control_points[lo : lo + self.space.degree + 1]
            out[p] = ders[p] @ ctrl
        return out

    def point(self, t) -> np.ndarray:
        return self.evaluate(t, 0)[0, 0]

    def speed(self, ts) -> np.ndarray:
        der = self.evaluate(ts, 1)[:, 1, :]
        return np.hypot(der[:, 0], der[:, 1])


def curve_eval(geom: CurveGeometry, t, deriv_order=0) -> np.ndarray:
    """F(t), F'(t) or F''(t) of the boundary map."""
    if deriv_order not in (0, 1, 2, 3):
        raise ValueError("deriv_order must be 0..3")
    return geom.evaluate(t, deriv_order)[0, deriv_order]


def parametric_speed(geom: CurveGeometry, t) -> float:
    """Arclength Jacobian J(t) = |F'(t)|."""
    j = float(geom.speed(np.array([t]))[0])
    if j <= 0.0:
        raise ValueError(f"degenerate parametrization: J({t}) = {j}")
    return j


# -- products of splines -----------------------------------------------


def product_space(space_a: SplineSpace, space_b: SplineSpace) -> SplineSpace:
    """Spline space of degree da+db containing every product of splines from
    the two factors (breakpoint union, smoothness = min of the factors)."""
    tol = 1e-10 * max(space_a.b - space_a.a, 1.0)
    if abs(space_a.a - space_b.a) > tol or abs(space_a.b - space_b.b) > tol:
        raise ValueError("product factors must share the parametric interval")
    if space_a.kind != OPEN or space_b.kind != OPEN:
        raise ValueError("product spaces are built on open (clamped) factors")
    q = space_a.degree + space_b.degree
    a, b = space_a.a, space_a.b

    merged = np.sort(np.concatenate([space_a.breakpoints(), space_b.breakpoints()]))
    values = [merged[0]]
    for v in merged[1:]:
        if v - values[-1] > tol:
            values.append(v)
    values = np.array(values)
    interior = values[(values > a + tol) & (values < b - tol)]

    pieces = [np.full(space_a.degree + space_b.degree + 1, a)]
    for x in interior:
        smooth = np.inf
        for sp in (space_a, space_b):
            m = sp.interior_multiplicity(x)
            if m > 0:
                smooth = min(smooth, sp.degree - m)
        mult = q - int(smooth)
        pieces.append(np.full(mult, x))
    pieces.append(np.full(q + 1, b))
    return SplineSpace(KnotVector(np.concatenate(pieces), q, OPEN))


def _chebyshev_nodes(lo, hi, n):
    k = np.arange(n)
    x = np.cos((2 * k + 1) * np.pi / (2 * n))
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * x


def product_coefficients(space_a: SplineSpace, i, space_b: SplineSpace, coeffs):
    """Coefficients of B_i^(a) * sigma in the product space.

    sigma is the spline in space_b with the given coefficients.  Works span by
    span: the product restricted to one span of the product space is a
    polynomial, so interpolating it at q+1 Chebyshev points of that span
    determines the active B-form coefficients exactly.
    """
    pi = product_space(space_a, space_b)
    q = pi.degree
    coeffs = np.asarray(coeffs, dtype=np.float64)
    eta = np.zeros(pi.dimension)
    bps = pi.breakpoints()
    for lo, hi in zip(bps[:-1], bps[1:]):
        pts = _chebyshev_nodes(lo, hi, q + 1)
        fvals = space_a.basis_on(i, pts) * space_b.spline_value(coeffs, pts)
        spans, ders = pi.tabulate(pts, 0)
        first = int(spans[0]) - q
        mat = ders[:, 0, :]
        try:
            local = np.linalg.solve(mat, fvals)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(
                f"singular local interpolation system on span [{lo}, {hi}]"
            ) from exc
        eta[first : first + q + 1] = local
    return pi, eta
