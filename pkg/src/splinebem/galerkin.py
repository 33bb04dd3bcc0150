"""Galerkin assembly and solve for the single-layer (Symm) equation on
spline boundary curves: exterior problems on open arcs in the indirect
formulation, interior problems on closed curves in the direct one.

Matrix entries split into the smooth kernel part (assembled globally through
dense node-grid products) and the weakly singular part (moment path for
source nodes near the inner support, kernel folding far away).  Outer
integrals always use the derivative-free rule; inner integrals follow the
configured procedure and variant.  Periodic problems assemble parametric
contributions and accumulate them into physical degrees of freedom through
the pairing map.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .kernels import (
    CLOSED_CURVE,
    OPEN_ARC,
    KernelSplit,
    dlp_grid,
    dlp_point,
    k1_dt_grid,
    k1_grid,
)
from .moments import MomentTable, moment_row
from .quadrature import QuadratureConfig, SupportRule, classify_integral, support_rule
from .reference import gauss_nodes
from .splines import (
    OPEN,
    PERIODIC,
    CurveGeometry,
    SplineSpace,
    evaluation_extension,
    periodic_pairing,
)

EXTERIOR_INDIRECT = "exterior-indirect"
INTERIOR_DIRECT = "interior-direct"


class NumericalError(RuntimeError):
    """Raised when the linear algebra cannot be trusted (singular system)."""


@dataclass
class BoundaryProblem:
    """One Dirichlet problem: geometry, formulation, datum, discrete space."""

    geometry: CurveGeometry
    formulation: str
    dirichlet: callable  # u_D composed with F, on [a, b]
    space: SplineSpace
    exact_flux: callable | None = None

    def __post_init__(self):
        if self.formulation not in (EXTERIOR_INDIRECT, INTERIOR_DIRECT):
            raise ValueError(f"unknown formulation {self.formulation!r}")
        if self.formulation == EXTERIOR_INDIRECT:
            if self.geometry.space.kind != OPEN:
                raise ValueError("the indirect exterior formulation needs an open arc")
        else:
            if self.geometry.space.kind != PERIODIC or self.space.kind != PERIODIC:
                raise ValueError(
                    "the direct interior formulation needs a closed curve and periodic space"
                )
        ga, gb = self.geometry.domain
        if abs(ga - self.space.a) > 1e-12 or abs(gb - self.space.b) > 1e-12:
            raise ValueError("discrete space and geometry must share the parameter interval")

    @property
    def kind(self) -> str:
        return OPEN_ARC if self.formulation == EXTERIOR_INDIRECT else CLOSED_CURVE

    @property
    def gamma(self) -> float:
        return self.geometry.interval_length


@dataclass
class GalerkinSystem:
    """Dense system in physical degrees of freedom plus the solution state."""

    problem: BoundaryProblem
    cfg: QuadratureConfig
    matrix: np.ndarray
    rhs: np.ndarray
    alpha: np.ndarray | None = None
    residual: float | None = None
    condition: float | None = None

    @property
    def n_dof(self) -> int:
        return self.matrix.shape[0]


class _Engine:
    """Shared tabulations for one (problem, cfg) assembly.

    Works directly in physical degrees of freedom: on closed curves each
    paired shape function is assembled once over its contiguous wrapped
    support (a single ordinary B-spline on the extended knot line), which
    keeps every quadrature rule a translate of the interior one.
    """

    def __init__(self, problem: BoundaryProblem, cfg: QuadratureConfig):
        self.problem = problem
        self.cfg = cfg
        self.space = problem.space
        self.kind = problem.kind
        self.gamma = problem.gamma if self.kind == CLOSED_CURVE else None
        self.table = MomentTable(theta=cfg.theta)

        if self.space.kind == PERIODIC:
            self.assembly_space, self.reps = evaluation_extension(self.space)
        else:
            self.assembly_space = self.space
            self.reps = np.arange(self.space.dimension)
        space = self.assembly_space
        self.n_dof = len(self.reps)

        df_cfg = replace(cfg, variant="derivative-free")
        self.outer_rules = [
            support_rule(space, i, df_cfg, self.kind, self.gamma) for i in self.reps
        ]
        self.inner_rules = [support_rule(space, i, cfg, self.kind, self.gamma) for i in self.reps]

        allnodes = np.concatenate([r.nodes for r in self.outer_rules])
        rounded = np.round(allnodes, 12)
        self.unique = np.unique(rounded)
        self.node_index = [
            np.searchsorted(self.unique, np.round(r.nodes, 12)) for r in self.outer_rules
        ]

        geom = problem.geometry
        vals = geom.evaluate(self.unique, 2)
        f1 = vals[:, 1, :]
        f2 = vals[:, 2, :]
        self.jac = np.hypot(f1[:, 0], f1[:, 1])
        self.jac_prime = (f1[:, 0] * f2[:, 0] + f1[:, 1] * f2[:, 1]) / self.jac

        self.split = KernelSplit(geom, self.kind)
        # inner integrals may use the Hermite variant (kernel and geometry
        # derivatives are analytic); outer integrals stay derivative-free
        self.hermite = cfg.variant == "hermite"

    def _wrap(self, ts):
        if self.space.kind != PERIODIC:
            return ts
        return self.space.a + (ts - self.space.a) % (self.space.b - self.space.a)

    # -- weight matrices -------------------------------------------------

    def _scatter(self, weights_per_rule, scale=None):
        mat = np.zeros((self.unique.size, self.n_dof))
        for i, w in enumerate(weights_per_rule):
            idx = self.node_index[i]
            np.add.at(mat[:, i], idx, w)
        if scale is not None:
            mat *= scale[:, None]
        return mat

    def outer_matrix(self):
        return self._scatter([r.regular_value_weights for r in self.outer_rules], self.jac)

    def inner_value_matrix(self):
        return self._scatter([r.regular_value_weights for r in self.inner_rules])

    def inner_deriv_matrix(self):
        return self._scatter([r.regular_deriv_weights for r in self.inner_rules])

    # -- matrix ------------------------------------------------------------

    def physical_matrix(self):
        u = self.unique
        wout = self.outer_matrix()
        win_v = self.inner_value_matrix()

        k1g = k1_grid(self.split, u, u)
        if self.hermite:
            win_d = self.inner_deriv_matrix()
            smooth = k1g @ (win_v * self.jac[:, None] + win_d * self.jac_prime[:, None])
            smooth += k1_dt_grid(self.split, u, u) @ (win_d * self.jac[:, None])
        else:
            smooth = k1g @ (win_v * self.jac[:, None])

        a_smooth = wout.T @ smooth
        a_weak = wout.T @ self._weak_inner_matrix()
        return -(a_smooth + a_weak) / (2.0 * np.pi)

    def _weak_inner_matrix(self):
        """Moment-path values of every weakly singular inner integral at
        every source node: entry [u, j] is int K2(s_u, t) B_j(t) J(t) dt.

        The moment path is used at all source distances (with the per-basis
        stability switch inside the rows); folding the kernel into a regular
        rule at mid distances leaves approximation error in t that provably
        does not cancel through the solve and caps the attainable orders.
        Rows are shared across translated supports via the class tables.
        """
        u = self.unique
        minner = np.zeros((u.size, self.n_dof))
        classes: dict = {}
        for j, rule in enumerate(self.inner_rules):
            idx = self.node_index[j]
            jv = self.jac[idx]
            jd = self.jac_prime[idx] if self.hermite else None
            eta = rule.coefficients(jv, jd)
            sig = MomentTable._signature(rule.moment_space)
            start = rule.moment_space.knots[0]
            entry = classes.setdefault(sig, {"space": rule.moment_space, "members": []})
            entry["members"].append((j, start, eta))

        for entry in classes.values():
            space = entry["space"]
            rep_start = space.knots[0]
            offsets = {}
            for _, start, _ in entry["members"]:
                for off in np.round(u - start, 12):
                    offsets.setdefault(off, None)
            off_keys = np.array(sorted(offsets))
            rows = np.empty((off_keys.size, space.dimension))
            for r, off in enumerate(off_keys):
                rows[r] = moment_row(
                    space, rep_start + off, self.kind, self.gamma, self.table
                )
            for j, start, eta in entry["members"]:
                idx = np.searchsorted(off_keys, np.round(u - start, 12))
                minner[:, j] = rows[idx] @ eta
        return minner

    # -- right-hand side ---------------------------------------------------

    def physical_rhs(self):
        u = self.unique
        wout = self.outer_matrix()
        ud = np.asarray(self.problem.dirichlet(self._wrap(u)), dtype=np.float64)
        beta1 = wout.T @ ud
        if self.problem.formulation == EXTERIOR_INDIRECT:
            return beta1
        dl_values = self._double_layer_trace(u)
        beta2 = wout.T @ dl_values
        return 0.5 * beta1 - beta2 / (2.0 * np.pi)

    def _double_layer_trace(self, sources):
        # inner integral of the double-layer term: the kernel is regular and
        # carries no B-spline factor, so composite per-element Gauss keeps it
        # at the h^(d+2) accuracy the rhs needs (a QI split of unity here
        # would cost one order and cap the attainable convergence)
        x, w = gauss_nodes(self.space.degree + 6)
        bps = self.space.breakpoints()
        mids = 0.5 * (bps[:-1] + bps[1:])
        halfs = 0.5 * (bps[1:] - bps[:-1])
        tt = (mids[:, None] + halfs[:, None] * x[None, :]).ravel()
        ww = (halfs[:, None] * w[None, :]).ravel()
        kern = dlp_grid(self.problem.geometry, sources, tt)
        ud = np.asarray(self.problem.dirichlet(tt), dtype=np.float64)
        return kern @ (ww * ud)


def assemble_matrix(problem: BoundaryProblem, cfg: QuadratureConfig) -> np.ndarray:
    """Galerkin matrix in physical degrees of freedom."""
    return _Engine(problem, cfg).physical_matrix()


def assemble_rhs(problem: BoundaryProblem, cfg: QuadratureConfig) -> np.ndarray:
    """Right-hand side in physical degrees of freedom."""
    return _Engine(problem, cfg).physical_rhs()


def assemble_system(problem: BoundaryProblem, cfg: QuadratureConfig) -> GalerkinSystem:
    """Matrix and right-hand side with shared tabulations."""
    engine = _Engine(problem, cfg)
    return GalerkinSystem(problem, cfg, engine.physical_matrix(), engine.physical_rhs())


CONDITION_WARN_THRESHOLD = 1e12


def solve(system: GalerkinSystem) -> np.ndarray:
    """Dense direct solve with a residual report and condition diagnostic."""
    a, b = system.matrix, system.rhs
    cond = float(np.linalg.cond(a))
    system.condition = cond
    if not np.isfinite(cond) or cond > 1e15:
        raise NumericalError(f"system is numerically singular (condition estimate {cond:.3e})")
    if cond > CONDITION_WARN_THRESHOLD:
        warnings.warn(
            f"ill-conditioned Galerkin matrix (condition estimate {cond:.3e})",
            RuntimeWarning,
            stacklevel=2,
        )
    try:
        alpha = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"direct solve failed: {exc}") from exc
    system.alpha = alpha
    scale = np.linalg.norm(b)
    system.residual = float(np.linalg.norm(a @ alpha - b) / scale) if scale > 0 else 0.0
    return alpha


def eval_solution(system: GalerkinSystem, ts) -> np.ndarray:
    """Parametric trace of the discrete flux at the given parameters."""
    if system.alpha is None:
        raise ValueError("solve the system first")
    space = system.problem.space
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    if space.kind == PERIODIC:
        ts = space.a + (ts - space.a) % (space.b - space.a)
    pmap = periodic_pairing(space)
    return space.collocation(ts) @ system.alpha[pmap]


def l2_error(system: GalerkinSystem, exact, relative=True) -> float:
    """L2(boundary) distance between the discrete flux and a reference."""
    space = system.problem.space
    geom = system.problem.geometry
    x, w = gauss_nodes(space.degree + 5)
    bps = space.breakpoints()
    err2 = 0.0
    norm2 = 0.0
    for lo, hi in zip(bps[:-1], bps[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        tt = mid + half * x
        jac = geom.speed(tt)
        diff = eval_solution(system, tt) - np.asarray(exact(tt), dtype=np.float64)
        err2 += half * np.sum(w * diff**2 * jac)
        norm2 += half * np.sum(w * np.asarray(exact(tt), dtype=np.float64) ** 2 * jac)
    if relative:
        if norm2 <= 0.0:
            raise ValueError("reference has zero norm; relative error undefined")
        return float(np.sqrt(err2 / norm2))
    return float(np.sqrt(err2))


def _element_arclengths(geom: CurveGeometry, space: SplineSpace):
    x, w = gauss_nodes(8)
    bps = space.breakpoints()
    out = []
    for lo, hi in zip(bps[:-1], bps[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        out.append(half * np.sum(w * geom.speed(mid + half * x)))
    return np.array(out)


def evaluate_potential(system: GalerkinSystem, x, order=16) -> float:
    """Field value at a point away from the boundary via the representation
    formula (single layer only for the exterior problem; double layer with
    the datum minus single layer for the interior one)."""
    if system.alpha is None:
        raise ValueError("solve the system first")
    problem = system.problem
    geom = problem.geometry
    space = problem.space
    x = np.asarray(x, dtype=np.float64)

    dense = np.linspace(space.a, space.b, 4 * space.dimension + 9)
    pts = geom.evaluate(dense, 0)[:, 0, :]
    mindist = float(np.min(np.hypot(pts[:, 0] - x[0], pts[:, 1] - x[1])))
    cutoff = float(np.max(_element_arclengths(geom, space)))
    if mindist < cutoff:
        raise ValueError(
            f"field point {x.tolist()} is {mindist:.3g} from the boundary; "
            f"closer than one element ({cutoff:.3g}), refusing near-boundary evaluation"
        )

    gx, gw = gauss_nodes(order)
    bps = space.breakpoints()
    edges = np.unique(
        np.concatenate([np.linspace(lo, hi, 3) for lo, hi in zip(bps[:-1], bps[1:])])
    )
    single = 0.0
    double = 0.0
    interior = problem.formulation == INTERIOR_DIRECT
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        tt = mid + half * gx
        f0 = geom.evaluate(tt, 0)[:, 0, :]
        dist = np.hypot(f0[:, 0] - x[0], f0[:, 1] - x[1])
        phi = eval_solution(system, tt)
        jac = geom.speed(tt)
        single += half * np.sum(gw * np.log(dist) * phi * jac)
        if interior:
            ud = np.asarray(problem.dirichlet(tt), dtype=np.float64)
            double += half * np.sum(gw * dlp_point(x, tt, geom) * ud)
    if interior:
        return float((double - single) / (2.0 * np.pi))
    return float(-single / (2.0 * np.pi))
