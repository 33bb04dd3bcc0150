"""Local quasi-interpolation on a uniform open knot vector over one support.

Two variants of the same Hermite-type operator are provided.  The full variant
consumes values and first derivatives at the breakpoints and is a projector
onto the spline space; the derivative-free variant replaces the derivatives by
fourth-order finite differences of the values (same approximation order p+1,
no projector property).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .splines import SplineSpace

SUPPORTED_DEGREES = (2, 3)


@dataclass(frozen=True)
class QiSpace:
    """Uniform open quasi-interpolation space on one interval."""

    start: float
    stop: float
    n: int
    degree: int

    def __post_init__(self):
        if self.degree not in SUPPORTED_DEGREES:
            raise ValueError(f"unsupported quasi-interpolation degree {self.degree}")
        if self.n < self.degree:
            raise ValueError("need at least degree+1 breakpoints")
        if not self.stop > self.start:
            raise ValueError("empty interval")

    @property
    def breakpoints(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n + 1)

    @property
    def spacing(self) -> float:
        return (self.stop - self.start) / self.n

    @property
    def width(self) -> float:
        return self.stop - self.start

    @property
    def dimension(self) -> int:
        return self.n + self.degree

    def spline_space(self) -> SplineSpace:
        return SplineSpace.open_uniform(self.start, self.stop, self.n, self.degree)


@dataclass(frozen=True)
class QuasiInterpolant:
    """Spline built by a quasi-interpolation rule; immutable after build."""

    space: QiSpace
    coefficients: np.ndarray

    def value(self, ts, deriv_order=0) -> np.ndarray:
        return self.space.spline_space().spline_value(self.coefficients, ts, deriv_order)


# -- coefficient maps ----------------------------------------------------
#
# All maps are cached on the unit interval; under an affine parameter change
# the value part is invariant and the derivative part scales with the width.

_HERMITE_MAPS: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
_FD_MAPS: dict[int, np.ndarray] = {}


def _hermite_maps_p2(n):
    dim = n + 2
    h = 1.0 / n
    lv = np.zeros((dim, n + 1))
    ld = np.zeros((dim, n + 1))
    lv[0, 0] = 1.0
    lv[dim - 1, n] = 1.0
    for j in range(-1, n - 1):
        row = j + 2
        lv[row, j + 1] += 0.5
        lv[row, j + 2] += 0.5
        ld[row, j + 1] += h / 4.0
        ld[row, j + 2] -= h / 4.0
    return lv, ld


def _hermite_maps_solved(p, n):
    """Per-coefficient functionals from local reproduction conditions.

    For each B-form coefficient, a small stencil of breakpoints is chosen near
    the middle of the basis support and the (value, derivative) weights solve
    the conditions "reproduce every basis function seen by the stencil".  The
    minimum-norm solution of the underdetermined consistent system is taken.
    """
    space = QiSpace(0.0, 1.0, n, p).spline_space()
    dim = space.dimension
    bps = np.linspace(0.0, 1.0, n + 1)
    vals = space.collocation(bps, 0).T
    ders = space.collocation(bps, 1).T
    lv = np.zeros((dim, n + 1))
    ld = np.zeros((dim, n + 1))
    for j in range(dim):
        center = int(round(space.greville(j) * n))
        solved = False
        for width in (3, 4, 5):
            lo = max(0, min(n - width + 1, center - width // 2))
            idx = np.arange(lo, lo + width)
            seen = [
                k
                for k in range(dim)
                if np.abs(vals[k, idx]).max() > 1e-13 or np.abs(ders[k, idx]).max() > 1e-13
            ]
            mat = np.concatenate([vals[np.ix_(seen, idx)], ders[np.ix_(seen, idx)]], axis=1)
            rhs = np.array([1.0 if k == j else 0.0 for k in seen])
            sol, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
            if np.abs(mat @ sol - rhs).max() < 1e-10:
                lv[j, idx] = sol[:width]
                ld[j, idx] = sol[width:]
                solved = True
                break
        if not solved:
            raise RuntimeError(f"no reproducing stencil for coefficient {j} (p={p}, n={n})")
    return lv, ld


def hermite_maps(p, n):
    """Value/derivative weight matrices of the Hermite operator on [0, 1]."""
    key = (p, n)
    if key not in _HERMITE_MAPS:
        if p == 2:
            _HERMITE_MAPS[key] = _hermite_maps_p2(n)
        else:
            _HERMITE_MAPS[key] = _hermite_maps_solved(p, n)
    return _HERMITE_MAPS[key]


def fd_matrix(n):
    """Fourth-order first-derivative matrix on n+1 unit-spaced-grid/n points."""
    if n not in _FD_MAPS:
        if n < 4:
            raise ValueError("derivative-free variant needs at least 5 breakpoints")
        h = 1.0 / n
        mat = np.zeros((n + 1, n + 1))
        row0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12 * h)
        row1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / (12 * h)
        mat[0, :5] = row0
        mat[1, :5] = row1
        for i in range(2, n - 1):
            mat[i, i - 2 : i + 3] = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12 * h)
        mat[n - 1, n - 4 :] = -row1[::-1]
        mat[n, n - 4 :] = -row0[::-1]
        _FD_MAPS[n] = mat
    return _FD_MAPS[n]


def derivative_free_map(p, n):
    lv, ld = hermite_maps(p, n)
    return lv + ld @ fd_matrix(n)


# -- operators -----------------------------------------------------------


def hermite_qi(g_values, g_derivs, space: QiSpace) -> QuasiInterpolant:
    """Projector quasi-interpolant from breakpoint values and derivatives."""
    g_values = np.asarray(g_values, dtype=np.float64)
    g_derivs = np.asarray(g_derivs, dtype=np.float64)
    if g_values.shape != (space.n + 1,) or g_derivs.shape != (space.n + 1,):
        raise ValueError(f"need {space.n + 1} values and derivatives")
    lv, ld = hermite_maps(space.degree, space.n)
    lam = lv @ g_values + space.width * (ld @ g_derivs)
    return QuasiInterpolant(space, lam)


def derivative_free_qi(g_values, space: QiSpace) -> QuasiInterpolant:
    """Same operator with finite-difference derivative estimates."""
    g_values = np.asarray(g_values, dtype=np.float64)
    if g_values.shape != (space.n + 1,):
        raise ValueError(f"need {space.n + 1} values")
    lam = derivative_free_map(space.degree, space.n) @ g_values
    return QuasiInterpolant(space, lam)


def qi_error_order_probe(
    g,
    p,
    n_sweep=(8, 16, 32, 64),
    variant="derivative-free",
    g_deriv=None,
    interval=(0.0, 1.0),
) -> float:
    """Least-squares slope of log(sup error) against log(spacing)."""
    a, b = interval
    errs, hs = [], []
    dense = np.linspace(a, b, 2049)
    for n in n_sweep:
        space = QiSpace(a, b, int(n), p)
        bps = space.breakpoints
        gv = np.array([g(t) for t in bps], dtype=np.float64)
        if variant == "hermite":
            if g_deriv is None:
                raise ValueError("hermite variant needs g_deriv")
            gd = np.array([g_deriv(t) for t in bps], dtype=np.float64)
            qi = hermite_qi(gv, gd, space)
        else:
            qi = derivative_free_qi(gv, space)
        err = np.abs(qi.value(dense) - np.array([g(t) for t in dense])).max()
        errs.append(err)
        hs.append(space.spacing)
    slope, _ = np.polyfit(np.log(hs), np.log(errs), 1)
    return float(slope)
