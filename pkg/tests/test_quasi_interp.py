import numpy as np
import pytest

from splinebem.quasi_interp import (
    QiSpace,
    derivative_free_qi,
    fd_matrix,
    hermite_qi,
    qi_error_order_probe,
)


def test_rejects_unsupported_degree():
    with pytest.raises(ValueError):
        QiSpace(0.0, 1.0, 8, 5)


def test_constant_reproduction_p2():
    space = QiSpace(0.0, 1.0, 6, 2)
    qi = hermite_qi(np.ones(7), np.zeros(7), space)
    assert np.allclose(qi.coefficients, 1.0, atol=1e-15)


def test_square_coefficients_match_blossoms():
    # tau = (0,0,0,0.5,1,1,1), g = t^2 -> lambda = (0, 0, 0.5, 1)
    space = QiSpace(0.0, 1.0, 2, 2)
    bp = space.breakpoints
    qi = hermite_qi(bp**2, 2 * bp, space)
    assert np.allclose(qi.coefficients, [0.0, 0.0, 0.5, 1.0], atol=1e-15)


def test_linear_gives_greville_abscissae():
    space = QiSpace(0.25, 1.75, 5, 2)
    bp = space.breakpoints
    qi = hermite_qi(bp, np.ones_like(bp), space)
    knots = space.spline_space().knots
    greville = np.array([0.5 * (knots[k + 1] + knots[k + 2]) for k in range(space.dimension)])
    assert np.allclose(qi.coefficients, greville, atol=1e-14)


@pytest.mark.parametrize("p", [2, 3])
def test_projector_on_random_splines(p):
    rng = np.random.default_rng(42)
    for n in (p, 5, 9, 16):
        if n < p:
            continue
        space = QiSpace(-0.3, 2.1, n, p)
        ss = space.spline_space()
        for _ in range(6):
            c = rng.standard_normal(ss.dimension)
            bp = space.breakpoints
            gv = ss.spline_value(c, bp)
            gd = ss.spline_value(c, bp, 1)
            qi = hermite_qi(gv, gd, space)
            assert np.abs(qi.coefficients - c).max() <= 1e-13 * max(1.0, np.abs(c).max())


@pytest.mark.parametrize("p", [2, 3])
def test_polynomial_reproduction_both_variants(p):
    space = QiSpace(0.0, 2.0, 8, p)
    bp = space.breakpoints
    dense = np.linspace(0.0, 2.0, 301)
    for k in range(p + 1):
        g = bp**k
        gd = k * bp ** max(k - 1, 0) if k else np.zeros_like(bp)
        for qi in (hermite_qi(g, gd, space), derivative_free_qi(g, space)):
            assert np.abs(qi.value(dense) - dense**k).max() < 1e-12


def test_derivative_free_matches_hermite_on_low_degree_polys():
    # the finite differences are exact up to degree 4
    space = QiSpace(0.0, 1.0, 9, 2)
    bp = space.breakpoints
    for k in range(5):
        g = bp**k
        gd = k * bp ** max(k - 1, 0) if k else np.zeros_like(bp)
        lam_h = hermite_qi(g, gd, space).coefficients
        lam_df = derivative_free_qi(g, space).coefficients
        assert np.allclose(lam_h, lam_df, atol=1e-12)


def test_derivative_free_needs_five_nodes():
    with pytest.raises(ValueError):
        fd_matrix(3)
    with pytest.raises(ValueError):
        derivative_free_qi(np.ones(4), QiSpace(0.0, 1.0, 3, 2))


def test_constant_derivative_free():
    space = QiSpace(0.0, 1.0, 7, 3)
    qi = derivative_free_qi(2.5 * np.ones(8), space)
    assert np.allclose(qi.coefficients, 2.5, atol=1e-14)


def test_fd_matrix_fourth_order():
    n = 16
    mat = fd_matrix(n)
    x = np.linspace(0.0, 1.0, n + 1)
    # exact on quartics
    assert np.abs(mat @ x**4 - 4 * x**3).max() < 1e-10
    err = np.abs(mat @ np.sin(x) - np.cos(x)).max()
    mat2 = fd_matrix(2 * n)
    x2 = np.linspace(0.0, 1.0, 2 * n + 1)
    err2 = np.abs(mat2 @ np.sin(x2) - np.cos(x2)).max()
    assert err2 < err / 12.0  # ~2^4 with slack


def test_convergence_ratio_sine():
    # sup-norm error ratio between n=16 and n=32 is about 2^(p+1)
    p = 2
    dense = np.linspace(0.0, 1.0, 4001)
    errs = []
    for n in (16, 32):
        space = QiSpace(0.0, 1.0, n, p)
        qi = derivative_free_qi(np.sin(space.breakpoints), space)
        errs.append(np.abs(qi.value(dense) - np.sin(dense)).max())
    ratio = errs[0] / errs[1]
    assert 2 ** (p + 1) / 1.8 < ratio < 2 ** (p + 1) * 1.8


@pytest.mark.parametrize("p,expected", [(2, 3.0), (3, 4.0)])
def test_order_probe_smooth(p, expected):
    slope = qi_error_order_probe(
        np.sin, p, n_sweep=(8, 16, 32, 64), variant="hermite", g_deriv=np.cos
    )
    assert abs(slope - expected) <= 0.2
    slope_df = qi_error_order_probe(np.sin, p, n_sweep=(8, 16, 32, 64))
    assert slope_df >= expected - 0.2


def test_hermite_projects_spline_but_derivative_free_does_not():
    p, n = 2, 8
    space = QiSpace(0.0, 1.0, n, p)
    ss = space.spline_space()
    rng = np.random.default_rng(5)
    c = rng.standard_normal(ss.dimension)
    g = lambda t: ss.spline_value(c, np.atleast_1d(t))[0]
    gd = lambda t: ss.spline_value(c, np.atleast_1d(t), 1)[0]
    dense = np.linspace(0, 1, 801)
    bp = space.breakpoints
    qi_h = hermite_qi(ss.spline_value(c, bp), ss.spline_value(c, bp, 1), space)
    err_h = np.abs(qi_h.value(dense) - ss.spline_value(c, dense)).max()
    assert err_h <= 1e-13
    qi_df = derivative_free_qi(ss.spline_value(c, bp), space)
    err_df = np.abs(qi_df.value(dense) - ss.spline_value(c, dense)).max()
    assert err_df > 1e-8  # not a projector


def test_locality_of_perturbation():
    # perturbing one value moves only a bounded band of coefficients
    p, n = 2, 12
    space = QiSpace(0.0, 1.0, n, p)
    base = np.zeros(n + 1)
    bumped = base.copy()
    bumped[6] = 1.0
    lam_h = hermite_qi(bumped, np.zeros(n + 1), space).coefficients
    assert np.count_nonzero(lam_h) <= 2
    lam_df = derivative_free_qi(bumped, space).coefficients
    assert np.count_nonzero(np.abs(lam_df) > 1e-14) <= 2 * p + 4
