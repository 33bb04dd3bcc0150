"""Quasi-interpolation quadrature for integrals of B_i * g and
K2(s,.) * B_i * g over one basis support, plus Gauss-Legendre and Telles
baselines and the regular / nearly-singular / singular routing.

Procedure qi1 approximates the whole product B_i * g by a quasi-interpolant
of degree p and integrates it exactly (B-spline integrals for regular
integrals, modified moments for singular ones).  Procedure qi2 approximates
only g, expands B_i * sigma_g in the degree d+p product space and integrates
that expansion exactly.  Everything reduces to fixed weight vectors against
the n+1 uniform nodes of the support, so one rule object serves any g.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import CLOSED_CURVE, OPEN_ARC, delta
from .moments import DEFAULT_THETA, MomentTable, moment_row, _source_distance
from .quasi_interp import QiSpace, derivative_free_map, hermite_maps
from .reference import gauss_nodes
from .splines import SplineSpace, product_space

PROCEDURES = ("qi1", "qi2")
VARIANTS = ("hermite", "derivative-free")

DEFAULT_NEAR_RADIUS = 2.0


@dataclass(frozen=True)
class QuadratureConfig:
    """Quadrature procedure selection for one solver run."""

    procedure: str = "qi2"
    degree: int = 2
    nodes: int = 7
    variant: str = "derivative-free"
    near_radius: float = DEFAULT_NEAR_RADIUS
    theta: float = DEFAULT_THETA

    def __post_init__(self):
        if self.procedure not in PROCEDURES:
            raise ValueError(f"procedure must be one of {PROCEDURES}, got {self.procedure!r}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        n = self.nodes - 1
        if n < self.degree:
            raise ValueError("need at least degree+1 quadrature nodes")
        if self.variant == "derivative-free" and n < 4:
            raise ValueError("the derivative-free variant needs at least 5 nodes")
        if self.near_radius < 0 or self.theta <= 0:
            raise ValueError("near_radius must be >= 0 and theta > 0")


def classify_integral(s, support, near_radius, kind=OPEN_ARC, gamma=None) -> str:
    """Routing of a log-kernel integral by source position."""
    lo, hi = support
    dist = _source_distance(float(s), lo, hi, kind, gamma)
    if dist == 0.0:
        return "singular"
    if dist <= near_radius * (hi - lo):
        return "nearly-singular"
    return "regular"


def _local_factor_space(space: SplineSpace, i) -> SplineSpace:
    """Open space on the clipped support of B_i carrying its interior knots."""
    lo, hi = space.clipped_support(i)
    d = space.degree
    scale = max(space.b - space.a, 1.0)
    inner = space.knots[(space.knots > lo + 1e-12 * scale) & (space.knots < hi - 1e-12 * scale)]
    knots = np.concatenate([[lo] * (d + 1), inner, [hi] * (d + 1)])
    return SplineSpace.from_knots(knots, d)


def _expansion_matrix(space: SplineSpace, i, qi: QiSpace):
    """Product space of B_i with the QI space, and the matrix taking QI
    coefficients to product-space coefficients of B_i * sigma."""
    factor = _local_factor_space(space, i)
    qspace = qi.spline_space()
    pi = product_space(factor, qspace)
    q = pi.degree
    mat = np.zeros((pi.dimension, qspace.dimension))
    bps = pi.breakpoints()
    for lo, hi in zip(bps[:-1], bps[1:]):
        k = np.arange(q + 1)
        pts = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos((2 * k + 1) * np.pi / (2 * (q + 1)))
        spans, ders = pi.tabulate(pts, 0)
        first = int(spans[0]) - q
        coll = ders[:, 0, :]
        rhs = space.basis_on(i, pts)[:, None] * qspace.collocation(pts)
        try:
            local = np.linalg.solve(coll, rhs)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(
                f"singular local interpolation system on span [{lo}, {hi}]"
            ) from exc
        mat[first : first + q + 1, :] = local
    return pi, mat


class SupportRule:
    """Precomputed quadrature data for one basis support.

    Regular integrals reduce to dot products with values of g at the nodes
    (plus derivative values for the Hermite qi1 variant); singular integrals
    pair the same coefficient maps with a moment row of the source.
    """

    def __init__(self, space: SplineSpace, i, cfg: QuadratureConfig, kind=OPEN_ARC, gamma=None):
        self.space = space
        self.index = i
        self.cfg = cfg
        self.kind = kind
        self.gamma = gamma if kind == CLOSED_CURVE else None
        if kind == CLOSED_CURVE and gamma is None:
            self.gamma = space.b - space.a
        lo, hi = space.clipped_support(i)
        self.support = (lo, hi)
        p = cfg.degree
        n = cfg.nodes - 1
        self.qi = QiSpace(lo, hi, n, p)
        self.nodes = self.qi.breakpoints
        self.basis_values = space.basis_on(i, self.nodes)
        self.basis_derivs = space.basis_on(i, self.nodes, 1)

        lv, ld = hermite_maps(p, n)
        self.map_value = lv
        self.map_deriv = self.qi.width * ld
        self.map_df = derivative_free_map(p, n)

        if cfg.procedure == "qi1":
            if cfg.variant == "hermite":
                self._validate_projector_setup()
            self.moment_space = self.qi.spline_space()
            wq = self.moment_space.all_integrals()
            if cfg.variant == "hermite":
                wv = wq @ self.map_value
                wd = wq @ self.map_deriv
                self.regular_value_weights = wv * self.basis_values + wd * self.basis_derivs
                self.regular_deriv_weights = wd * self.basis_values
            else:
                w = wq @ self.map_df
                self.regular_value_weights = w * self.basis_values
                self.regular_deriv_weights = None
        else:
            self.pi_space, expand = _expansion_matrix(space, i, self.qi)
            self.moment_space = self.pi_space
            if cfg.variant == "hermite":
                self.eta_value_map = expand @ self.map_value
                self.eta_deriv_map = expand @ self.map_deriv
            else:
                self.eta_value_map = expand @ self.map_df
                self.eta_deriv_map = None
            w_pi = self.pi_space.all_integrals()
            self.regular_value_weights = w_pi @ self.eta_value_map
            self.regular_deriv_weights = (
                w_pi @ self.eta_deriv_map if self.eta_deriv_map is not None else None
            )

    def _validate_projector_setup(self):
        # the projector-based constant exactness needs the discrete-space
        # B-spline inside the QI space: p >= d and knots aligned on D_i
        cfg, space = self.cfg, self.space
        if cfg.degree < space.degree:
            raise ValueError(
                "hermite qi1 needs QI degree >= discrete degree for the projector property"
            )
        lo, hi = self.support
        scale = hi - lo
        inner = space.knots[(space.knots > lo + 1e-12) & (space.knots < hi - 1e-12)]
        nodes = self.nodes
        for knot in inner:
            if np.min(np.abs(nodes - knot)) > 1e-10 * scale:
                raise ValueError(
                    "hermite qi1 needs the support knots among the quadrature nodes "
                    f"(knot {knot} missed; choose a node count aligned with the mesh)"
                )

    # -- regular integrals ------------------------------------------------

    def regular(self, g_values, g_derivs=None) -> float:
        value = float(self.regular_value_weights @ np.asarray(g_values, dtype=np.float64))
        if self.regular_deriv_weights is not None:
            if g_derivs is None:
                raise ValueError("hermite variant needs derivative values of g")
            value += float(self.regular_deriv_weights @ np.asarray(g_derivs, dtype=np.float64))
        return value

    # -- singular integrals -------------------------------------------------

    def coefficients(self, g_values, g_derivs=None) -> np.ndarray:
        """Coefficients paired with the moment row (lambda for qi1 in the QI
        space, eta for qi2 in the product space)."""
        g_values = np.asarray(g_values, dtype=np.float64)
        if self.cfg.procedure == "qi1":
            tilde = self.basis_values * g_values
            if self.cfg.variant == "hermite":
                if g_derivs is None:
                    raise ValueError("hermite variant needs derivative values of g")
                tilde_d = self.basis_derivs * g_values + self.basis_values * np.asarray(
                    g_derivs, dtype=np.float64
                )
                return self.map_value @ tilde + self.map_deriv @ tilde_d
            return self.map_df @ tilde
        if self.eta_deriv_map is not None:
            if g_derivs is None:
                raise ValueError("hermite variant needs derivative values of g")
            return self.eta_value_map @ g_values + self.eta_deriv_map @ np.asarray(
                g_derivs, dtype=np.float64
            )
        return self.eta_value_map @ g_values

    def moments(self, s, table: MomentTable | None = None) -> np.ndarray:
        return moment_row(self.moment_space, s, self.kind, self.gamma, table)

    def singular(self, s, g_values, g_derivs=None, table: MomentTable | None = None) -> float:
        coeffs = self.coefficients(g_values, g_derivs)
        return float(coeffs @ self.moments(s, table))

    def classify(self, s) -> str:
        return classify_integral(s, self.support, self.cfg.near_radius, self.kind, self.gamma)

    def fold_kernel(self, s, g_values, g_derivs=None) -> float:
        """Regular-path value with K2(s, .) folded into g (far sources)."""
        k2v = np.log(delta(s, self.nodes, self.kind, self.gamma))
        if self.regular_deriv_weights is None:
            return self.regular(g_values * k2v)
        if g_derivs is None:
            raise ValueError("hermite variant needs derivative values of g")
        shifts = [s] if self.kind == OPEN_ARC else [s, s - self.gamma, s + self.gamma]
        k2d = np.zeros_like(self.nodes)
        for c in shifts:
            k2d += 1.0 / (self.nodes - c)
        return self.regular(g_values * k2v, g_derivs * k2v + g_values * k2d)


def support_rule(space, i, cfg, kind=OPEN_ARC, gamma=None) -> SupportRule:
    cache = getattr(space, "_support_rules", None)
    if cache is None:
        cache = {}
        space._support_rules = cache
    key = (i, cfg, kind, gamma)
    rule = cache.get(key)
    if rule is None:
        rule = SupportRule(space, i, cfg, kind, gamma)
        cache[key] = rule
    return rule


def _values(g, ts):
    try:
        out = np.asarray(g(ts), dtype=np.float64)
    except (TypeError, ValueError):
        out = np.array([g(t) for t in ts], dtype=np.float64)
    if out.shape != ts.shape:
        out = np.array([g(t) for t in ts], dtype=np.float64)
    return out


def qi1_regular(g, space, i, cfg, g_deriv=None) -> float:
    """Integral of B_i * g by quasi-interpolation of the whole product."""
    cfg = _as_procedure(cfg, "qi1")
    rule = support_rule(space, i, cfg)
    gv = _values(g, rule.nodes)
    gd = _values(g_deriv, rule.nodes) if g_deriv is not None else None
    return rule.regular(gv, gd)


def qi2_regular(g, space, i, cfg) -> float:
    """Integral of B_i * g via the product-space expansion of B_i * sigma_g."""
    cfg = _as_procedure(cfg, "qi2")
    rule = support_rule(space, i, cfg)
    return rule.regular(_values(g, rule.nodes))


def _singular(g, s, space, i, cfg, kind, gamma, g_deriv, table):
    rule = support_rule(space, i, cfg, kind, gamma)
    gv = _values(g, rule.nodes)
    gd = _values(g_deriv, rule.nodes) if g_deriv is not None else None
    if rule.classify(s) == "regular":
        return rule.fold_kernel(s, gv, gd)
    return rule.singular(s, gv, gd, table)


def qi1_singular(g, s, space, i, cfg, kind=OPEN_ARC, gamma=None, g_deriv=None, table=None) -> float:
    """Integral of K2(s,.) * B_i * g; moment path unless the source is far."""
    cfg = _as_procedure(cfg, "qi1")
    return _singular(g, s, space, i, cfg, kind, gamma, g_deriv, table)


def qi2_singular(g, s, space, i, cfg, kind=OPEN_ARC, gamma=None, table=None) -> float:
    """Product-space variant of the weakly singular integral."""
    cfg = _as_procedure(cfg, "qi2")
    return _singular(g, s, space, i, cfg, kind, gamma, None, table)


def _as_procedure(cfg: QuadratureConfig, procedure) -> QuadratureConfig:
    if cfg.procedure == procedure:
        return cfg
    return QuadratureConfig(
        procedure,
        cfg.degree,
        cfg.nodes,
        cfg.variant,
        cfg.near_radius,
        cfg.theta,
    )


# -- baselines ------------------------------------------------------------


def gauss_legendre(f, a, b, order) -> float:
    """Standard Gauss-Legendre rule on [a, b]; f must accept arrays."""
    x, w = gauss_nodes(order)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return float(half * np.sum(w * _values(f, mid + half * x)))


def telles(f_regular, s, a, b, order) -> float:
    """Integral of f_regular(t) * log|t-s| by the cubic coordinate map with
    vanishing Jacobian at the singular point, then Gauss-Legendre."""
    tol = 1e-14 * (b - a)

    def one_sided(alpha, beta, at_left):
        if beta - alpha <= tol:
            return 0.0
        x, w = gauss_nodes(order)
        if at_left:
            t = alpha + (beta - alpha) * ((x + 1.0) / 2.0) ** 3
            jac = 3.0 * (beta - alpha) * (x + 1.0) ** 2 / 8.0
        else:
            t = beta - (beta - alpha) * ((1.0 - x) / 2.0) ** 3
            jac = 3.0 * (beta - alpha) * (1.0 - x) ** 2 / 8.0
        vals = _values(f_regular, t) * np.log(np.abs(t - s))
        return float(np.sum(w * vals * jac))

    if s <= a + tol:
        return one_sided(a, b, at_left=True)
    if s >= b - tol:
        return one_sided(a, b, at_left=False)
    return one_sided(a, s, at_left=False) + one_sided(s, b, at_left=True)
