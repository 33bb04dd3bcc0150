import numpy as np
import pytest

from splinebem.kernels import CLOSED_CURVE, OPEN_ARC
from splinebem.moments import MomentTable
from splinebem.quadrature import (
    QuadratureConfig,
    SupportRule,
    classify_integral,
    gauss_legendre,
    qi1_regular,
    qi1_singular,
    qi2_regular,
    qi2_singular,
    support_rule,
    telles,
)
from splinebem.reference import regular_basis_integral, singular_basis_integral
from splinebem.splines import SplineSpace


class TestConfig:
    def test_defaults_valid(self):
        cfg = QuadratureConfig()
        assert cfg.procedure == "qi2" and cfg.nodes == 7

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            QuadratureConfig(procedure="qi3")
        with pytest.raises(ValueError):
            QuadratureConfig(variant="magic")
        with pytest.raises(ValueError):
            QuadratureConfig(degree=3, nodes=3)
        with pytest.raises(ValueError):
            QuadratureConfig(variant="derivative-free", nodes=4, degree=2)


class TestClassification:
    def test_inside_is_singular(self):
        assert classify_integral(0.5, (0.0, 1.0), 2.0) == "singular"

    def test_near(self):
        assert classify_integral(1.5, (0.0, 1.0), 2.0) == "nearly-singular"

    def test_far(self):
        assert classify_integral(11.0, (0.0, 1.0), 2.0) == "regular"

    def test_periodic_image_counts(self):
        assert (
            classify_integral(0.99, (-1.0, -0.9), 1.0, CLOSED_CURVE, gamma=2.0)
            == "nearly-singular"
        )
        assert classify_integral(1.0, (-1.0, -0.9), 1.0, CLOSED_CURVE, gamma=2.0) == "singular"


class TestGaussLegendre:
    def test_cubic_exact_order2(self):
        assert gauss_legendre(lambda x: x**3, 0.0, 1.0, 2) == pytest.approx(0.25, abs=1e-15)

    def test_exponential(self):
        assert gauss_legendre(np.exp, 0.0, 1.0, 10) == pytest.approx(np.e - 1.0, abs=1e-14)

    def test_degree_2n_minus_1_exact(self):
        rng = np.random.default_rng(0)
        for order in (3, 5, 8):
            coeffs = rng.standard_normal(2 * order)
            poly = np.polynomial.Polynomial(coeffs)
            exact = poly.integ()(1.0) - poly.integ()(-1.0)
            assert gauss_legendre(poly, -1.0, 1.0, order) == pytest.approx(exact, rel=1e-13)


class TestTelles:
    def test_log_endpoint(self):
        got = telles(lambda t: np.ones_like(t), 0.0, 0.0, 1.0, 20)
        assert abs(got - (-1.0)) < 1e-6

    def test_interior_split(self):
        # int_0^1 log|t - 0.3| dt
        exact = 0.7 * np.log(0.7) + 0.3 * np.log(0.3) - 1.0
        got = telles(lambda t: np.ones_like(t), 0.3, 0.0, 1.0, 20)
        assert abs(got - exact) < 1e-6

    def test_with_regular_factor(self):
        # blunt accuracy only: the spline factor is just C^1 at the interior
        # knots the map does not see
        space = SplineSpace.open_uniform(-1.0, 1.0, 10, 2)
        i, s = 5, -0.1
        lo, hi = space.clipped_support(i)
        got = telles(lambda t: space.basis_on(i, t), s, lo, hi, 24)
        ref = singular_basis_integral(space, i, s)
        assert abs(got - ref) < 1e-4


def _mesh_space(h, degree=2):
    n_elem = int(round(2.0 / h))
    return SplineSpace.open_uniform(-1.0, 1.0, n_elem, degree)


class TestQi1Regular:
    def test_hermite_constant_exact(self):
        space = _mesh_space(0.2)
        cfg = QuadratureConfig("qi1", 2, 7, "hermite")
        for i in (0, 1, 5, space.dimension - 1):
            got = qi1_regular(
                lambda t: np.ones_like(t), space, i, cfg, g_deriv=lambda t: np.zeros_like(t)
            )
            assert abs(got - space.bspline_integral(i)) <= 1e-13

    def test_derivative_free_constant_inexact(self):
        space = _mesh_space(0.2)
        cfg = QuadratureConfig("qi1", 2, 7, "derivative-free")
        errs = [
            abs(qi1_regular(lambda t: np.ones_like(t), space, i, cfg) - space.bspline_integral(i))
            for i in range(space.dimension)
        ]
        assert max(errs) > 1e-9  # not a projector: no constant exactness

    def test_smooth_g_second_order(self):
        g = lambda t: 3 * np.sin(np.pi * (t + 1)) * np.cos(t + 1)
        gd = lambda t: 3 * np.pi * np.cos(np.pi * (t + 1)) * np.cos(t + 1) - 3 * np.sin(
            np.pi * (t + 1)
        ) * np.sin(t + 1)
        cfg = QuadratureConfig("qi1", 2, 7, "hermite")
        errs = []
        for h in (0.2, 0.1, 0.05):
            space = _mesh_space(h)
            err = max(
                abs(
                    qi1_regular(g, space, i, cfg, g_deriv=gd)
                    - regular_basis_integral(space, i, g, order=24)
                )
                for i in range(space.dimension)
            )
            errs.append(err)
        rate = np.polyfit(np.log([0.2, 0.1, 0.05]), np.log(errs), 1)[0]
        assert rate == pytest.approx(2.0, abs=0.4)

    def test_projector_alignment_enforced(self):
        space = _mesh_space(0.2, degree=3)
        with pytest.raises(ValueError):
            qi1_regular(
                lambda t: np.ones_like(t),
                space,
                4,
                QuadratureConfig("qi1", 2, 7, "hermite"),
                g_deriv=lambda t: np.zeros_like(t),
            )
        with pytest.raises(ValueError):
            # 6 intervals on a 4-element support: knots not among nodes
            qi1_regular(
                lambda t: np.ones_like(t),
                space,
                4,
                QuadratureConfig("qi1", 3, 7, "hermite"),
                g_deriv=lambda t: np.zeros_like(t),
            )


class TestQi2Regular:
    def test_polynomial_exactness_chain(self):
        space = _mesh_space(0.25)
        cfg = QuadratureConfig("qi2", 2, 7)
        for power in range(3):
            g = lambda t, p=power: t**p
            for i in (0, 3, space.dimension - 1):
                ref = regular_basis_integral(space, i, g, order=24)
                assert qi2_regular(g, space, i, cfg) == pytest.approx(ref, abs=1e-12)

    def test_constant_exact(self):
        space = _mesh_space(0.25)
        cfg = QuadratureConfig("qi2", 2, 7)
        for i in range(space.dimension):
            got = qi2_regular(lambda t: np.ones_like(t), space, i, cfg)
            assert abs(got - space.bspline_integral(i)) <= 1e-13

    def test_smooth_g_superconvergence(self):
        g = lambda t: 3 * np.sin(np.pi * (t + 1)) * np.cos(t + 1)
        cfg = QuadratureConfig("qi2", 2, 7)
        errs = []
        hs = (0.4, 0.2, 0.1)
        for h in hs:
            space = _mesh_space(h)
            err = max(
                abs(qi2_regular(g, space, i, cfg) - regular_basis_integral(space, i, g, order=24))
                for i in range(space.dimension)
            )
            errs.append(err)
        rate = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert rate == pytest.approx(5.0, abs=0.5)


class TestQiSingular:
    def test_qi1_hermite_constant_exact_straight_line(self):
        # with the projector and aligned knots, I_{w}(const) is exact up to
        # the accuracy of the moments
        space = _mesh_space(0.5)
        cfg = QuadratureConfig("qi1", 2, 7, "hermite")
        i = 2
        for s in (-0.3, 0.1, 0.62):
            got = qi1_singular(
                lambda t: np.ones_like(t),
                s,
                space,
                i,
                cfg,
                g_deriv=lambda t: np.zeros_like(t),
            )
            ref = singular_basis_integral(space, i, s)
            assert got == pytest.approx(ref, rel=1e-11, abs=1e-13)

    def test_qi2_constant_exact(self):
        space = _mesh_space(0.5)
        cfg = QuadratureConfig("qi2", 2, 7)
        i = 1
        for s in (-0.9, 0.0, 0.4):
            got = qi2_singular(lambda t: np.ones_like(t), s, space, i, cfg)
            ref = singular_basis_integral(space, i, s)
            assert got == pytest.approx(ref, rel=1e-10, abs=1e-13)

    def test_qi2_matches_moment_linearity(self):
        # eta against moments equals sum over product basis moments
        space = _mesh_space(0.5)
        cfg = QuadratureConfig("qi2", 2, 7)
        rule = support_rule(space, 2, cfg)
        g = lambda t: 1.0 + 0.0 * t
        eta = rule.coefficients(g(rule.nodes))
        s = 0.15
        row = rule.moments(s)
        assert float(eta @ row) == pytest.approx(
            qi2_singular(g, s, space, 2, cfg), rel=1e-14
        )

    def test_far_source_routes_to_regular_fold(self):
        space = _mesh_space(0.1)
        cfg = QuadratureConfig("qi2", 2, 7, near_radius=2.0)
        i = 10
        lo, hi = space.clipped_support(i)
        s = hi + 10 * (hi - lo)
        rule = support_rule(space, i, cfg)
        assert rule.classify(s) == "regular"
        got = qi2_singular(lambda t: np.ones_like(t), s, space, i, cfg)
        folded = rule.fold_kernel(s, np.ones_like(rule.nodes))
        assert got == folded

    def test_routing_consistency_at_near_boundary(self):
        # singular-path and regular-path values agree where the router flips
        space = _mesh_space(0.1)
        cfg = QuadratureConfig("qi2", 2, 13, near_radius=2.0)
        i = space.dimension // 2
        lo, hi = space.clipped_support(i)
        width = hi - lo
        g = lambda t: np.cos(t)
        for eps in (-1e-9, 1e-9):
            s = hi + cfg.near_radius * width + eps
            lhs = qi2_singular(g, s, space, i, cfg)
            rule = support_rule(space, i, cfg)
            sing = rule.singular(s, g(rule.nodes))
            fold = rule.fold_kernel(s, g(rule.nodes))
            assert abs(sing - fold) <= 1e-8 * max(1.0, abs(sing))
            assert lhs in (sing, fold)

    def test_singular_convergence_orders(self):
        g = lambda t: np.sqrt(1.0 + 4.0 * t * t)
        gd = lambda t: 4.0 * t / np.sqrt(1.0 + 4.0 * t * t)
        hs = (0.4, 0.2, 0.1)
        errs1, errs2 = [], []
        for h in hs:
            space = _mesh_space(h)
            table = MomentTable()
            worst1 = worst2 = 0.0
            for i in range(space.dimension):
                lo, hi = space.clipped_support(i)
                for s in (lo, 0.5 * (lo + hi), hi):
                    ref = singular_basis_integral(space, i, s, g=g)
                    got1 = qi1_singular(
                        g, s, space, i, QuadratureConfig("qi1", 2, 7, "hermite"),
                        g_deriv=gd, table=table,
                    )
                    got2 = qi2_singular(
                        g, s, space, i, QuadratureConfig("qi2", 2, 7), table=table
                    )
                    worst1 = max(worst1, abs(got1 - ref))
                    worst2 = max(worst2, abs(got2 - ref))
            errs1.append(worst1)
            errs2.append(worst2)
        rate1 = np.polyfit(np.log(hs), np.log(errs1), 1)[0]
        rate2 = np.polyfit(np.log(hs), np.log(errs2), 1)[0]
        assert rate1 == pytest.approx(2.0, abs=0.3)
        assert rate2 == pytest.approx(5.0, abs=0.6)
        assert max(errs2) < max(errs1)

    def test_monotone_node_refinement(self):
        g = lambda t: np.sqrt(1.0 + 4.0 * t * t)
        space = _mesh_space(0.2)
        errs = []
        for nodes in (7, 13):
            cfg = QuadratureConfig("qi2", 2, nodes)
            worst = 0.0
            for i in (0, 4, 8):
                lo, hi = space.clipped_support(i)
                s = 0.5 * (lo + hi)
                ref = singular_basis_integral(space, i, s, g=g)
                worst = max(worst, abs(qi2_singular(g, s, space, i, cfg) - ref))
            errs.append(worst)
        assert errs[1] <= errs[0]


class TestClosedCurveSingular:
    def test_qi2_periodic_image(self):
        space = SplineSpace.periodic_uniform(-1.0, 1.0, 8, 3)
        cfg = QuadratureConfig("qi2", 2, 9)
        g = lambda t: np.cos(0.5 * np.pi * t)
        i = space.dimension - 1  # support clipped at b
        lo, hi = space.clipped_support(i)
        assert hi == pytest.approx(1.0)
        local = SplineSpace.from_knots(
            np.concatenate([[lo] * 4, space.knots[(space.knots > lo) & (space.knots < hi)], [hi] * 4]),
            3,
        )
        for s in (-0.99, 0.3, hi - 0.01):
            got = qi2_singular(g, s, space, i, cfg, kind=CLOSED_CURVE, gamma=2.0)
            # reference against the clipped basis piece
            def piece(t):
                return space.basis_on(i, t) * g(t)

            from splinebem.reference import log_kernel_integral, composite_gauss

            bps = [b for b in space.breakpoints() if lo - 1e-12 <= b <= hi + 1e-12]
            ref = 0.0
            for x0, x1 in zip(bps[:-1], bps[1:]):
                for c in (s, s - 2.0, s + 2.0):
                    ref += log_kernel_integral(piece, x0, x1, c)
                ref += -2.0 * np.log(2.0) * composite_gauss(piece, [x0, x1], 24)
            assert got == pytest.approx(ref, rel=2e-4)

    def test_qi2_periodic_image_constant_exact(self):
        space = SplineSpace.periodic_uniform(-1.0, 1.0, 8, 3)
        cfg = QuadratureConfig("qi2", 2, 9)
        i = space.dimension - 1
        s = -0.97  # near the image of the clipped support across the seam
        got = qi2_singular(lambda t: np.ones_like(t), s, space, i, cfg, kind=CLOSED_CURVE)
        ref = singular_basis_integral(space, i, s, CLOSED_CURVE, gamma=2.0)
        assert got == pytest.approx(ref, rel=1e-10)
