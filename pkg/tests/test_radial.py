"""Radial reductions, the radial solver and the closed-form ball solutions."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hessquot import radial
from hessquot.radial import RadialSolveError, explicit_profile, solve_radial, verify_explicit


def admissible(nmax):
    return [(n, k, l) for n in range(1, nmax + 1) for k in range(1, n + 1) for l in range(k)]


class TestSolver:
    @pytest.mark.parametrize("n,k,l", [(2, 1, 0), (3, 2, 1), (4, 4, 2), (5, 3, 0)])
    @pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
    def test_euclid_is_paraboloid(self, n, k, l, c):
        p = solve_radial("euclid", n, k, l, c)
        assert p.R == pytest.approx(c, abs=1e-12)
        np.testing.assert_allclose(p.u, 0.5 * (p.r**2 - c * c), atol=1e-10)
        assert p.in_cone(k)

    @pytest.mark.parametrize("c", [0.3, 0.5, 0.9])
    @pytest.mark.parametrize("n,k,l", [(2, 2, 1), (3, 2, 0), (4, 3, 1)])
    def test_hyper_radius(self, n, k, l, c):
        p = solve_radial("hyper", n, k, l, c)
        assert p.R == pytest.approx(math.atanh(c), abs=1e-10)
        ex = explicit_profile("hyper", n, c)
        np.testing.assert_allclose(p.u, ex.eval(np.minimum(p.r, ex.R))[0], atol=1e-10)

    @pytest.mark.parametrize("c", [0.5, 1.0, 3.0])
    def test_graph_is_unit_sphere_cap(self, c):
        p = solve_radial("graph", 3, 2, 1, c)
        assert p.R == pytest.approx(c / math.sqrt(1 + c * c), abs=1e-10)
        np.testing.assert_allclose(p.u, np.sqrt(1 - p.R**2) - np.sqrt(1 - p.r**2), atol=1e-10)

    def test_bad_inputs(self):
        with pytest.raises(RadialSolveError):
            solve_radial("hyper", 3, 2, 1, 1.0)
        with pytest.raises(ValueError):
            solve_radial("euclid", 3, 2, 1, -1.0)
        with pytest.raises(ValueError):
            solve_radial("euclid", 3, 2, 2, 1.0)
        with pytest.raises(ValueError):
            solve_radial("euclid", 2, 3, 1, 1.0)

    def test_csv_columns(self):
        text = solve_radial("euclid", 3, 2, 1, 1.0).to_csv(samples=11)
        lines = text.strip().split("\n")
        assert lines[0] == "r,u,du,d2u,lambda_1,lambda_2,lambda_3"
        assert len(lines) == 12
        assert float(lines[-1].split(",")[1]) == pytest.approx(0.0, abs=1e-12)

    def test_interpolant_between_samples(self):
        p = solve_radial("hyper", 3, 2, 1, 0.5)
        ex = explicit_profile("hyper", 3, 0.5)
        r = np.linspace(0, p.R, 777)
        for a, b in zip(p.eval(r), ex.eval(r)):
            np.testing.assert_allclose(a, b, atol=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 6), st.data(), st.floats(0.2, 3.0))
    def test_euclid_radius_equals_slope(self, n, data, c):
        k = data.draw(st.integers(1, n))
        l = data.draw(st.integers(0, k - 1))
        p = solve_radial("euclid", n, k, l, c, h=1e-3)
        assert p.R == pytest.approx(c, rel=1e-10)
        assert abs(p.du[-1] - c) < 1e-12


class TestSpectrum:
    def test_euclid_spectrum_all_ones(self):
        lam = radial.radial_spectrum(explicit_profile("euclid", 4), np.linspace(0, 1, 9))
        np.testing.assert_allclose(lam, 1.0, atol=1e-15)

    def test_hyper_spectrum_equal(self):
        p = explicit_profile("hyper", 3, 0.9)
        lam = radial.radial_spectrum(p, np.linspace(0, p.R, 9))
        np.testing.assert_allclose(lam, lam[:, :1] * np.ones(3), rtol=1e-12)

    def test_center_limit(self):
        p = explicit_profile("graph", 3)
        lam = radial.radial_spectrum(p, np.array([0.0, 1e-9]))
        np.testing.assert_allclose(lam, 1.0, atol=1e-12)


class TestExplicit:
    @pytest.mark.parametrize("n,k,l", admissible(4))
    def test_all_geometries_pass(self, n, k, l):
        for geom, c in [("euclid", None), ("hyper", 0.5), ("graph", None)]:
            rep = verify_explicit(geom, n, k, l, c=c)
            assert rep.passed, rep.to_dict()

    def test_half_plus_u_is_not_constant_on_hemisphere(self):
        rep = verify_explicit("graph", 2, 2, 1)
        assert rep.p_spread < 1e-12
        assert rep.alternate_p_spread == pytest.approx(1 - 2**-0.5, abs=1e-12)
        assert verify_explicit("euclid", 2, 2, 1).alternate_p_spread is None

    def test_expected_p_values(self):
        assert radial.expected_p("hyper", 0.5) == 0.25
        assert radial.expected_p("curv", 1.0) == pytest.approx(2**-0.5)

    def test_report_json_sorted(self):
        s = radial.report_json(verify_explicit("euclid", 2, 2, 1))
        assert '"passed": true' in s

    def test_hyper_rejects_c_out_of_range(self):
        with pytest.raises(ValueError):
            explicit_profile("hyper", 3, 1.5)
