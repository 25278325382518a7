"""P-functions, the linearized quotient operator and maximum scans."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hessquot import pfunc, symfunc
from hessquot.fields import AnalyticField, explicit_euclid_field, explicit_graph_field
from hessquot.integral import StarDomain
from hessquot.radial import explicit_profile, solve_radial


class TestEvaluate:
    def test_values(self):
        assert pfunc.evaluate_p("euclid", -0.5, [1.0, 0.0]) == pytest.approx(2.0)
        assert pfunc.evaluate_p("hyper", -0.5, [1.0]) == pytest.approx(1.0 - 0.25 + 1.0)
        assert pfunc.evaluate_p("curv", 0.0, [0.0, 0.0]) == pytest.approx(1.0)

    def test_constant_on_explicit_profiles(self):
        for geom, c, expected in [("euclid", None, 1.0), ("hyper", 0.3, 0.09), ("graph", None, 2**-0.5)]:
            p = explicit_profile(geom, 3, c)
            P = pfunc.evaluate_p(pfunc.KIND_OF_GEOMETRY[p.geometry], p.u, p.du[:, None])
            np.testing.assert_allclose(P, expected, atol=1e-12)


class TestLinearized:
    def test_identity(self):
        L = pfunc.fij_matrix(2, 1, np.eye(3))
        np.testing.assert_allclose(L.F, np.eye(3) / 3, atol=1e-15)

    def test_matches_finite_differences(self, rng):
        B = rng.normal(size=(4, 4))
        A = B @ B.T + np.eye(4)
        F = pfunc.fij_matrix(3, 1, A).F
        h = 1e-6

        def quot(M):
            s = symfunc.sym_all_of_matrix(M)
            return s[3] / s[1]

        for i in range(4):
            for j in range(4):
                E = np.zeros((4, 4))
                E[i, j] = h
                assert (quot(A + E) - quot(A - E)) / (2 * h) == pytest.approx(F[i, j], abs=1e-6)

    def test_singular(self):
        with pytest.raises(pfunc.SingularQuotientError):
            pfunc.fij_matrix(2, 1, np.diag([1.0, -1.0]))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.data())
    def test_euler_identity(self, seed, n, data):
        # S_k/S_l is homogeneous of degree k-l
        k = data.draw(st.integers(1, n))
        l = data.draw(st.integers(0, k - 1))
        A, _ = symfunc.random_cone_matrix(np.random.default_rng(seed), n, k)
        L = pfunc.fij_matrix(k, l, A)
        assert np.sum(L.F * A) == pytest.approx((k - l) * L.Sk / L.Sl, rel=1e-9, abs=1e-9)
        np.testing.assert_allclose(L.F, L.F.T, atol=1e-9 * max(1.0, np.abs(L.F).max()))


class TestEllipticOnP:
    def test_euclid_analytic_is_zero(self):
        v = pfunc.elliptic_on_p(explicit_euclid_field(3), 2, 1, "euclid", [0.2, 0.1, -0.3])
        assert abs(v) < 1e-6

    def test_graph_analytic_is_zero(self):
        v = pfunc.elliptic_on_p(explicit_graph_field(2), 2, 1, "curv", [0.2, 0.3])
        assert abs(v) < 1e-6

    def test_gate_rejects_non_solution(self):
        quartic = AnalyticField.radial(2, lambda r: r**4 + r * r, lambda r: 4 * r**3 + 2 * r,
                                       lambda r: 12 * r * r + 2)
        with pytest.raises(pfunc.EquationGateError):
            pfunc.elliptic_on_p(quartic, 2, 1, "euclid", [0.5, 0.0])

    def test_admissibility_gate(self):
        with pytest.raises(pfunc.AdmissibilityError):
            pfunc.elliptic_on_p(explicit_euclid_field(2).scaled(-1.0), 2, 1, "euclid", [0.2, 0.0])

    @pytest.mark.parametrize("n,k,l", [(2, 1, 0), (3, 2, 1), (4, 4, 2), (5, 3, 0)])
    def test_radial_euclid_subsolution(self, n, k, l):
        vals = pfunc.elliptic_along_profile(solve_radial("euclid", n, k, l, 1.5), k, l)
        assert vals.min() >= -1e-6

    def test_radial_hyper_exact_profile(self):
        p = explicit_profile("hyper", 3, 0.5, 2, 1)
        vals = pfunc.elliptic_along_profile(p, 2, 1, samples=50)
        assert np.max(np.abs(vals)) < 1e-8

    def test_radius_outside(self):
        with pytest.raises(ValueError):
            pfunc.elliptic_on_p(explicit_profile("euclid", 2, None, 2, 1), 2, 1, point=1.5)


class TestExtremumScan:
    def test_explicit_solution_is_flat(self):
        rep = pfunc.extremum_scan(explicit_euclid_field(2), "euclid", StarDomain.disk(1.0), 2, 1, resolution=32)
        assert rep.status == "solution"
        assert abs(rep.margin) < 1e-12
        assert rep.min_FijPij > -1e-6

    def test_non_solution_flagged(self):
        f = AnalyticField.radial(2, lambda r: -r**4, lambda r: -4 * r**3, lambda r: -12 * r * r)
        rep = pfunc.extremum_scan(f, "euclid", StarDomain.disk(1.0), 2, 1, resolution=32)
        assert rep.status == "not-a-solution"
        assert rep.min_FijPij is None

    def test_unchecked_without_indices(self):
        rep = pfunc.extremum_scan(explicit_graph_field(2), "curv", StarDomain.disk(0.7), resolution=32)
        assert rep.status == "unchecked"
        assert '"status": "unchecked"' in rep.to_json()

    def test_domain_required(self):
        with pytest.raises(ValueError):
            pfunc.extremum_scan(explicit_euclid_field(2), "euclid")
