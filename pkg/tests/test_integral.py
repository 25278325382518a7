"""Quadrature on star domains and the integral-identity ledgers."""
import json
import math

import numpy as np
import pytest

from hessquot import integral
from hessquot.fields import AnalyticField, explicit_euclid_field, explicit_graph_field
from hessquot.integral import IdentityGateError, StarDomain, build_quadrature
from hessquot.radial import explicit_profile, solve_radial

ROOT_HALF = 1 / math.sqrt(2)


def ellipse_solution(a, b, c):
    """u = c (x^2/a^2 + y^2/b^2 - 1)."""
    D = np.diag([2 * c / a**2, 2 * c / b**2])
    return AnalyticField(
        2,
        lambda p: c * (p[:, 0] ** 2 / a**2 + p[:, 1] ** 2 / b**2 - 1),
        lambda p: p @ D,
        lambda p: np.broadcast_to(D, (len(p), 2, 2)).copy(),
        name="ellipse_quadratic",
    )


class TestDomains:
    def test_ellipse_curvature_vertices(self):
        dom = StarDomain.ellipse(2.0, 1.0)
        np.testing.assert_allclose(dom.curvature(np.array([0.0, np.pi / 2])), [2.0, 0.25], rtol=1e-12)

    def test_numerical_derivatives_match_analytic(self):
        ref = StarDomain.cos_perturbed(0.1, 3)
        num = StarDomain.from_radius_function(ref.rho)
        th = np.linspace(0, 2 * np.pi, 50)
        np.testing.assert_allclose(num.curvature(th), ref.curvature(th), atol=1e-8)

    def test_contains(self):
        dom = StarDomain.ellipse(1.2, 1.0)
        assert list(dom.contains([[1.1, 0.0], [0.0, 1.1]])) == [True, False]

    @pytest.mark.parametrize("bad", [lambda: StarDomain.cos_perturbed(1.0, 2),
                                     lambda: StarDomain(3, (0, 0, 0)),
                                     lambda: StarDomain.from_radius_function(lambda t: np.cos(t))])
    def test_invalid(self, bad):
        with pytest.raises(integral.DomainError):
            bad()


class TestQuadrature:
    def test_disk_area_and_perimeter(self):
        q = build_quadrature(StarDomain.disk(2.0), 64)
        assert q.area == pytest.approx(4 * math.pi, rel=1e-14)
        assert q.perimeter == pytest.approx(4 * math.pi, rel=1e-14)

    def test_ellipse_area_and_moment(self):
        a, b = 1.5, 0.8
        q = build_quadrature(StarDomain.ellipse(a, b), 256)
        assert q.area == pytest.approx(math.pi * a * b, rel=1e-12)
        assert q.integrate(q.nodes[:, 0] ** 2) == pytest.approx(math.pi * a**3 * b / 4, rel=1e-12)

    def test_polynomial_exactness_up_to_order(self):
        q = build_quadrature(StarDomain.disk(1.0), 32)
        x, y = q.nodes.T
        # int_disk x^4 y^2 = int r^7 dr * int cos^4 sin^2 = pi/64
        assert q.order >= 6
        assert q.integrate(x**4 * y**2) == pytest.approx(math.pi / 64, rel=1e-13)

    def test_ball(self):
        q = build_quadrature(StarDomain.ball(1.0), 32)
        assert q.area == pytest.approx(4 * math.pi / 3, rel=1e-13)
        assert q.perimeter == pytest.approx(4 * math.pi, rel=1e-13)
        np.testing.assert_allclose(np.linalg.norm(q.normals, axis=1), 1.0)

    def test_divergence_theorem_on_perturbed_domain(self):
        q = build_quadrature(StarDomain.cos_perturbed(0.2, 3), 256)
        # div(x) = 2
        assert q.integrate_boundary(np.sum(q.boundary_nodes * q.normals, axis=1)) == pytest.approx(2 * q.area, rel=1e-12)

    def test_too_coarse(self):
        with pytest.raises(ValueError):
            build_quadrature(StarDomain.disk(), 8)


class TestMinkowski:
    @pytest.mark.parametrize("dom", [StarDomain.disk(0.7), StarDomain.ellipse(1.3, 0.6),
                                     StarDomain.cos_perturbed(0.1, 2)], ids=["disk", "ellipse", "cos"])
    def test_planar(self, dom):
        assert abs(integral.minkowski_residual(dom, 1, 512).residual) < 1e-10

    @pytest.mark.parametrize("k", [1, 2])
    def test_sphere(self, k):
        assert abs(integral.minkowski_residual(StarDomain.ball(1.3), k, 32).residual) < 1e-10

    def test_hyperbolic_sphere(self):
        assert integral.minkowski_hyperbolic_sphere(0.7, 3, 2).relative_residual < 1e-14

    def test_k_range(self):
        with pytest.raises(ValueError):
            integral.minkowski_residual(StarDomain.disk(), 2)


class TestPohozaev:
    @pytest.mark.parametrize("k,l", [(1, 0), (2, 0), (2, 1)])
    def test_euclid_disk(self, k, l):
        led = integral.pohozaev_euclid(explicit_euclid_field(2), StarDomain.disk(1.0), k, l, 128)
        assert led.relative_residual < 1e-13

    @pytest.mark.parametrize("k,l", [(2, 1), (3, 0), (3, 2)])
    def test_euclid_ball(self, k, l):
        led = integral.pohozaev_euclid(explicit_euclid_field(3), StarDomain.ball(1.0), k, l, 32)
        assert led.relative_residual < 1e-12

    def test_euclid_on_ellipse_solution(self):
        # Dirichlet data only: the ledger does not need a constant normal derivative
        a, b = 1.2, 1.0
        led = integral.pohozaev_euclid(ellipse_solution(a, b, (a * a + b * b) / 4), StarDomain.ellipse(a, b), 2, 1, 256)
        assert led.relative_residual < 1e-12

    def test_euclid_gate(self):
        with pytest.raises(IdentityGateError):
            integral.pohozaev_euclid(explicit_euclid_field(2, 0.9), StarDomain.disk(1.0), 2, 1, 64)
        led = integral.pohozaev_euclid(explicit_euclid_field(2, 0.9), StarDomain.disk(1.0), 2, 1, 64, gate=False)
        assert led.relative_residual > 1e-3

    @pytest.mark.parametrize("c", [0.3, 0.5, 0.9])
    def test_hyper_corrected_closes_printed_does_not(self, c):
        led = integral.pohozaev_hyper(explicit_profile("hyper", 3, c), None, 2, 1, 128)
        assert led.relative_residual < 1e-12
        assert led.variants["boundary_coefficients_-C_n^l_-C_n^k"]["relative_residual"] > 0.1

    def test_hyper_on_solved_profile(self):
        led = integral.pohozaev_hyper(solve_radial("hyper", 4, 3, 1, 0.5), None, 3, 1, 128)
        assert led.relative_residual < 1e-8

    @pytest.mark.parametrize("n,dom", [(2, StarDomain.disk(ROOT_HALF)), (3, StarDomain.ball(ROOT_HALF))])
    def test_curv(self, n, dom):
        led = integral.pohozaev_curv(explicit_graph_field(n), dom, 2, 1, 64)
        assert led.relative_residual < 1e-12
        assert led.variants["boundary_signs_flipped"]["relative_residual"] > 0.1
        assert led.variants["boundary_flux_identity"]["relative_residual"] < 1e-12

    def test_ledger_json_schema(self):
        led = integral.pohozaev_euclid(explicit_euclid_field(2), StarDomain.disk(1.0), 2, 1, 64)
        d = json.loads(led.to_json())
        assert set(d) >= {"identity", "params", "terms", "residual", "relative_residual", "resolution"}
        assert len(d["terms"]) == 5 and {"name", "value"} == set(d["terms"][0])


class TestBoundaryConversion:
    @pytest.mark.parametrize("k", [1, 2])
    def test_disk(self, k):
        r = integral.boundary_conversion_residuals(explicit_euclid_field(2, 0.8), StarDomain.disk(0.8), k, 256)
        assert r["pointwise_residual"] < 1e-12
        assert r["integrated_relative_residual"] < 1e-12
        assert r["normal_derivative"] == pytest.approx(0.8)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_ball_coefficient(self, k):
        r = integral.boundary_conversion_residuals(explicit_euclid_field(3), StarDomain.ball(1.0), k, 32)
        assert r["integrated_relative_residual"] < 1e-12
        assert r["coefficient_measured"] == pytest.approx(r["coefficient_expected"], rel=1e-12)

    def test_requires_constant_normal_derivative(self):
        with pytest.raises(IdentityGateError):
            integral.boundary_conversion_residuals(ellipse_solution(1.2, 1.0, 0.61), StarDomain.ellipse(1.2, 1.0), 2, 64)


class TestConvergenceHelpers:
    def test_orders(self):
        assert integral.observed_orders([64, 128, 256], [1e-2, 2.5e-3, 6.25e-4]) == pytest.approx([2.0, 2.0])

    def test_converges(self):
        assert integral.converges_at_order([1e-2, 2.4e-3, 5e-4])
        assert not integral.converges_at_order([1e-2, 5e-3])
        assert integral.converges_at_order([1e-14, 2e-15, 3e-15])

    def test_grid_backed_curv_ledger_is_second_order(self):
        f = explicit_graph_field(2)
        res = []
        for N in (129, 257):
            g = f.sample([-0.8, -0.8], [0.8, 0.8], [N, N])
            res.append(integral.pohozaev_curv(g, StarDomain.disk(ROOT_HALF), 2, 1, 256, gate=False).relative_residual)
        assert integral.observed_orders([129, 257], res)[0] > 1.8
