"""Closed-form families: zero-curvature family, Bernoulli equation, cylinder and negative leg."""

import math

import numpy as np
import pytest

from soliton_lab.errors import BlowUpError, DomainError, SingularLocusError
from soliton_lab.families import (
    NEGATIVE_VARIANTS,
    ZeroCurvatureFamily,
    bernoulli_closed_form,
    bernoulli_constant,
    bernoulli_rhs,
    cylinder_profile,
    cylinder_psi,
    family_psi,
    kazdan_negative_phi,
    kazdan_negative_profile,
    kazdan_triple,
    log_derivative,
    log_grid,
    negative_leg_curvature,
    negative_leg_curvature_alternatives,
    sample_curvature,
    singular_set,
    solve_bernoulli,
    verify_leg,
)
from soliton_lab.geometry import RadialProfile, radial_scalar_curvature


def central(f, r, h=1e-5):
    return (f(r + h) - f(r - h)) / (2 * h), (f(r + h) - 2 * f(r) + f(r - h)) / (h * h)


# ---------------------------------------------------------------------------
# Zero-curvature family
# ---------------------------------------------------------------------------


class TestFamily:
    def test_validation(self):
        with pytest.raises(ValueError):
            ZeroCurvatureFamily(1.0, 0.0, 4)
        with pytest.raises(ValueError):
            ZeroCurvatureFamily(1.0, 1.0, 2)
        with pytest.raises(ValueError):
            ZeroCurvatureFamily(math.inf, 1.0, 4)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_A_zero_is_linear(self, n):
        j = family_psi(ZeroCurvatureFamily(0.0, 2.5, n), 1.7)
        assert (j.v, j.d1, j.d2) == pytest.approx((2.5 * 1.7, 2.5, 0.0))

    def test_n4_hand_values(self):
        j = family_psi(ZeroCurvatureFamily(1.0, 1.0, 4), 1.0)
        assert (j.v, j.d1, j.d2) == pytest.approx((0.5, 0.25, -0.25), abs=1e-15)

    @pytest.mark.parametrize("n,A,k2", [(3, 0.5, 2.0), (5, -0.3, 1.0), (6, 2.0, 0.5)])
    def test_derivatives_match_differences(self, n, A, k2):
        fam = ZeroCurvatureFamily(A, k2, n)
        j = family_psi(fam, 0.8)
        d1, d2 = central(lambda r: family_psi(fam, r).v, 0.8)
        assert j.d1 == pytest.approx(d1, rel=1e-8)
        assert j.d2 == pytest.approx(d2, rel=1e-4)

    def test_sphere_error(self):
        with pytest.raises(SingularLocusError):
            family_psi(ZeroCurvatureFamily(-1.0, 1.0, 4), 1.0)

    def test_nonpositive_r(self):
        with pytest.raises(DomainError):
            family_psi(ZeroCurvatureFamily(1.0, 1.0, 4), 0.0)

    def test_name(self):
        assert ZeroCurvatureFamily(1.0, 2.0, 4).name == "family(A=1,k2=2,n=4)"


class TestSingularSet:
    def test_origin_only_for_nonnegative_A(self):
        ss = singular_set(ZeroCurvatureFamily(0.0, 1.0, 4))
        assert ss.has_origin and ss.sphere_radius is None

    def test_unit_sphere(self):
        assert singular_set(ZeroCurvatureFamily(-1.0, 1.0, 4)).sphere_radius == pytest.approx(1.0)

    def test_radius_for_A_minus_eight(self):
        assert singular_set(ZeroCurvatureFamily(-8.0, 1.0, 4)).sphere_radius == pytest.approx(
            math.sqrt(1 / 8), rel=1e-14
        )

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    @pytest.mark.parametrize("A", [-0.25, -1.0, -3.0])
    def test_radius_solves_base_equation(self, n, A):
        R = singular_set(ZeroCurvatureFamily(A, 1.0, n)).sphere_radius
        assert 1 + A * (R * R) ** ((n - 2) / 2) == pytest.approx(0.0, abs=1e-14)

    @pytest.mark.parametrize("n", [3, 4, 5])
    @pytest.mark.parametrize("A", [-0.5, -2.0])
    def test_errors_exactly_at_and_beyond_sphere(self, n, A):
        fam = ZeroCurvatureFamily(A, 1.0, n)
        prof = fam.profile()
        r_s = fam.singular_set().sphere_r
        for r in np.geomspace(r_s / 50, r_s * 50, 41):
            base = 1 + A * r ** ((n - 2) / 2)
            if base <= 0:
                with pytest.raises(SingularLocusError):
                    prof(float(r))
            else:
                assert prof(float(r)).is_finite()


class TestFamilyCurvature:
    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    @pytest.mark.parametrize("A", [0.0, 0.5, 2.0, -1.0])
    def test_zero_on_grid(self, n, A):
        # near the sphere the individual terms grow like (1 + A r^m)^(-2/m-2), so the
        # rounding floor is relative to their size rather than absolute
        prof = ZeroCurvatureFamily(A, 1.5, n).profile()
        samples, _ = sample_curvature(prof, n, log_grid())
        assert samples
        for r, k in samples:
            j = prof(r)
            scale = 4 * r * (2 * (n - 1) * abs(j.v * j.d2) + n * (n - 1) * j.d1**2) + 4 * n * (n - 1) * abs(j.v * j.d1)
            assert abs(k) < max(1e-8, 1e-14 * scale)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_perturbation_breaks_zero_curvature(self, n):
        fam = ZeroCurvatureFamily(1.0, 1.0, n).profile()
        bumped = RadialProfile("bumped", lambda r: fam.fn(r) * (1 + 1e-2 * r))
        samples, _ = sample_curvature(bumped, n, log_grid())
        assert max(abs(k) for _, k in samples) > 1e-4


# ---------------------------------------------------------------------------
# Bernoulli equation
# ---------------------------------------------------------------------------


class TestBernoulli:
    @pytest.mark.parametrize("n", [3, 4, 7])
    @pytest.mark.parametrize("r", [0.5, 2.0])
    def test_reciprocal_solves_for_A_zero(self, n, r):
        assert bernoulli_rhs(n, r, 1 / r) == pytest.approx(-1 / r**2, rel=1e-14)

    def test_closed_form_n4(self):
        y0 = 1 / (1.0 + 1.0)
        y = solve_bernoulli(4, 1.0, y0, 2.0)
        assert y == pytest.approx(1 / 6, abs=1e-8)

    def test_constant_recovered_from_initial_value(self):
        assert bernoulli_constant(5, 2.0, bernoulli_closed_form(5, 0.7, 2.0)) == pytest.approx(0.7)

    @pytest.mark.parametrize("n", [3, 4, 5])
    @pytest.mark.parametrize("A", [0.0, 0.5, 1.0, -0.01])
    def test_solver_matches_closed_form(self, n, A):
        y0 = bernoulli_closed_form(n, A, 1.0)
        for r1 in (1.5, 4.0, 10.0):
            assert solve_bernoulli(n, 1.0, y0, r1) == pytest.approx(
                bernoulli_closed_form(n, A, r1), abs=1e-8
            )

    def test_blow_up(self):
        # 1/y = -r^2 + r crosses zero at r = 1 when integrating from r = 0.5
        y0 = bernoulli_closed_form(4, -1.0, 0.5)
        with pytest.raises(BlowUpError):
            solve_bernoulli(4, 0.5, y0, 2.0)

    def test_closed_form_pole(self):
        with pytest.raises(BlowUpError):
            bernoulli_closed_form(4, -1.0, 1.0)

    @pytest.mark.parametrize("n", [3, 4, 5])
    @pytest.mark.parametrize("A", [0.0, 1.0, -0.2])
    def test_family_log_derivative_satisfies_equation(self, n, A):
        fam = ZeroCurvatureFamily(A, 1.0, n)
        for r in log_grid(0.1, 3.0, 16):
            if not fam.profile().in_domain(r):
                continue
            y, dy = log_derivative(family_psi(fam, float(r)))
            assert abs(dy - bernoulli_rhs(n, float(r), y)) < 1e-8
            assert y == pytest.approx(bernoulli_closed_form(n, A, float(r)), rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            solve_bernoulli(3, 0.0, 1.0, 1.0)


# ---------------------------------------------------------------------------
# Cylinder and negative leg
# ---------------------------------------------------------------------------


class TestCylinder:
    def test_jet_at_four(self):
        j = cylinder_psi(4.0)
        assert (j.v, j.d1, j.d2) == pytest.approx((2.0, 0.25, -0.03125))

    @pytest.mark.parametrize("n", [3, 4, 5])
    @pytest.mark.parametrize("r", [0.5, 1.0, 9.0])
    def test_constant_curvature(self, n, r):
        assert radial_scalar_curvature(cylinder_profile(), n, r) == pytest.approx((n - 1) * (n - 2), rel=1e-13)

    def test_domain(self):
        with pytest.raises(DomainError):
            cylinder_psi(-1.0)


class TestNegativeLeg:
    def test_value_n3_at_one(self):
        assert kazdan_negative_phi(3, 1.0).v == pytest.approx(math.exp(-4.0), rel=1e-15)

    def test_derivatives_match_differences(self):
        j = kazdan_negative_phi(3, 1.0)
        d1, d2 = central(lambda r: kazdan_negative_phi(3, r).v, 1.0)
        assert j.d1 == pytest.approx(d1, rel=1e-8)
        assert j.d2 == pytest.approx(d2, rel=1e-4)

    def test_variants_agree_for_n4(self):
        for r in (0.3, 2.0):
            assert kazdan_negative_phi(4, r, "swapped") == kazdan_negative_phi(4, r)

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            kazdan_negative_phi(4, 1.0, "other")

    @pytest.mark.parametrize("n", [3, 4, 5, 6, 8])
    def test_default_variant_negative(self, n):
        # K ~ -r^(n-1) near 0 and ~ exp(-2 r) far out, both below the rounding noise of the
        # radial formula's terms for large n; the closed form covers the whole range
        samples, _ = sample_curvature(kazdan_negative_profile(n), n, log_grid(0.05, 5, 64))
        assert max(k for _, k in samples) < 0
        assert max(negative_leg_curvature(n, float(r)) for r in log_grid(1e-3, 50, 64)) < 0

    @pytest.mark.parametrize("n", [5, 6])
    def test_swapped_variant_positive_somewhere(self, n):
        samples, _ = sample_curvature(kazdan_negative_profile(n, "swapped"), n, log_grid())
        assert max(k for _, k in samples) > 0

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    @pytest.mark.parametrize("r", [0.05, 0.7, 3.0])
    def test_closed_form_matches_radial_formula(self, n, r):
        k = radial_scalar_curvature(kazdan_negative_profile(n), n, r)
        assert negative_leg_curvature(n, r) == pytest.approx(k, rel=1e-11)

    def test_circulating_forms_disagree(self):
        k = radial_scalar_curvature(kazdan_negative_profile(3), 3, 1.0)
        for value in negative_leg_curvature_alternatives(3, 1.0).values():
            assert abs(value - k) > 1e-3 * abs(k)

    def test_variant_names(self):
        assert NEGATIVE_VARIANTS[0] == "half-power"


class TestKazdanTriple:
    @pytest.mark.parametrize("n", [3, 4])
    def test_all_legs(self, n):
        t = kazdan_triple(n)
        assert t.passed
        assert t.positive.curvatures[0] == pytest.approx((n - 1) * (n - 2), abs=1e-9)

    def test_n5_zero_leg_with_k2_two(self):
        t = kazdan_triple(5, A=1.0, k2=2.0)
        assert t.zero.passed and max(abs(k) for k in t.zero.curvatures) < 1e-8

    def test_requires_positive_A(self):
        with pytest.raises(ValueError):
            kazdan_triple(4, A=0.0)

    def test_leg_report_failure(self):
        rep = verify_leg("neg", cylinder_profile(), 3, [1.0, 2.0], "negative")
        assert not rep.passed

    def test_leg_unknown_expectation(self):
        with pytest.raises(ValueError):
            verify_leg("x", cylinder_profile(), 3, [1.0], "sideways")
