"""Closed-form conformal tensors: hand values, internal consistency, FD cross-checks."""

import math

import mpmath
import numpy as np
import pytest

from soliton_lab.errors import (
    ConformalFactorZeroError,
    DimensionMismatchError,
    DomainError,
    SingularLocusError,
)
from soliton_lab.families import ZeroCurvatureFamily, cylinder_profile, kazdan_negative_profile
from soliton_lab.fd_oracle import conformally_flat_metric, fd_christoffels, fd_scalar_curvature
from soliton_lab.geometry import (
    RadialProfile,
    Signature,
    conformal_christoffels,
    conformal_hessian,
    conformal_ricci,
    constant_profile,
    linear_profile,
    metric_trace,
    point_with_invariant,
    radial_derivatives,
    radial_invariant,
    radial_scalar_curvature,
    scalar_curvature,
)
from soliton_lab.jet import jet_pow

E3 = Signature.riemannian(3)
E4 = Signature.riemannian(4)
ONE = constant_profile(1.0)
IDENTITY = linear_profile(1.0)


def r_over_one_plus_r():
    return RadialProfile("r/(1+r)", lambda r: r / (1 + r))


def fd_metric(profile, s):
    return conformally_flat_metric(s.eps, profile.value, profile.singular_r, name=profile.name)


# ---------------------------------------------------------------------------
# Signatures and points
# ---------------------------------------------------------------------------


class TestSignature:
    def test_parse(self):
        assert Signature.parse("++-").eps == (1, 1, -1)

    def test_parse_unicode_minus(self):
        assert Signature.parse("+++−").eps == (1, 1, 1, -1)

    def test_round_trip_string(self):
        assert str(Signature.parse("+-+-")) == "+-+-"

    def test_rejects_other_entries(self):
        with pytest.raises(ValueError):
            Signature((1, 0, 1))

    def test_rejects_low_dimension(self):
        with pytest.raises(ValueError):
            Signature((1, 1))

    def test_bad_character(self):
        with pytest.raises(ValueError):
            Signature.parse("++x")

    def test_riemannian_flag(self):
        assert E3.is_riemannian and not Signature.parse("++-").is_riemannian


class TestRadialInvariant:
    def test_euclidean(self):
        assert radial_invariant([1, 1, 1], E3) == 3.0

    def test_signature_sign(self):
        assert radial_invariant([1, 1, 1], Signature.parse("++-")) == 1.0

    def test_origin(self):
        assert radial_invariant([0, 0, 0], E3) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            radial_invariant([1, 2], E3)

    @pytest.mark.parametrize("sig", ["+++", "++++", "+++-", "++--", "+-+-+"])
    @pytest.mark.parametrize("r", [0.1, 1.0, 7.5])
    def test_point_with_invariant(self, sig, r):
        s = Signature.parse(sig)
        p = point_with_invariant(r, s)
        assert radial_invariant(p, s) == pytest.approx(r, rel=1e-14)
        assert np.count_nonzero(p) == s.n

    def test_all_negative_signature_unreachable(self):
        with pytest.raises(DomainError):
            point_with_invariant(1.0, Signature.parse("---"))


class TestRadialProfile:
    def test_domain_error(self):
        with pytest.raises(DomainError):
            cylinder_profile()(-1.0)

    def test_singular_sphere_error(self):
        prof = ZeroCurvatureFamily(-1.0, 1.0, 4).profile()
        with pytest.raises(SingularLocusError):
            prof(1.0)

    def test_cartesian_chain_rule(self):
        # f(r) = r^2 = |x|^4 on Euclidean space: grad = 4|x|^2 x
        sq = RadialProfile("r^2", lambda r: r * r)
        p = np.array([0.3, -0.4, 1.2])
        d = radial_derivatives(sq, E3, p)
        assert np.allclose(d.grad, 4 * d.r * p)
        expected = 8 * np.outer(p, p) + 4 * d.r * np.eye(3)
        assert np.allclose(d.hess, expected)


# ---------------------------------------------------------------------------
# Christoffels, Hessian, Ricci
# ---------------------------------------------------------------------------


class TestChristoffels:
    def test_flat(self):
        assert np.all(conformal_christoffels(ONE, E3, [0.3, 0.2, 0.1]) == 0.0)

    def test_hand_values_for_identity_profile(self):
        G = conformal_christoffels(IDENTITY, E3, [1.0, 0.0, 0.0])
        assert G[0, 0, 0] == pytest.approx(-2.0)
        assert G[0, 1, 1] == pytest.approx(2.0)
        # distinct indices vanish
        assert G[0, 1, 2] == 0.0 and G[2, 0, 1] == 0.0

    def test_symmetric_in_lower_indices(self):
        G = conformal_christoffels(r_over_one_plus_r(), Signature.parse("++-+"), [0.9, 0.4, 0.3, 0.2])
        assert np.array_equal(G, G.transpose(0, 2, 1))

    def test_zero_factor(self):
        zero = RadialProfile("r-1", lambda r: r - 1.0)
        with pytest.raises(ConformalFactorZeroError):
            conformal_christoffels(zero, E3, [1.0, 0.0, 0.0])

    @pytest.mark.parametrize("sig", ["+++", "++-+"])
    def test_matches_finite_differences(self, sig):
        s = Signature.parse(sig)
        prof = r_over_one_plus_r()
        p = point_with_invariant(1.3, s)
        closed = conformal_christoffels(prof, s, p)
        fd = fd_christoffels(fd_metric(prof, s), p)
        assert np.max(np.abs(closed - fd)) < 1e-6


class TestHessian:
    def test_euclidean_hessian_of_r(self):
        H = conformal_hessian(IDENTITY, ONE, E3, [0.4, -0.2, 0.7])
        assert np.allclose(H, 2 * np.eye(3))

    def test_constant_potential(self):
        H = conformal_hessian(constant_profile(3.0), r_over_one_plus_r(), E4, [0.2, 0.3, 0.4, 0.5])
        assert np.all(H == 0.0)

    def test_hand_value(self):
        H = conformal_hessian(IDENTITY, IDENTITY, E3, [1.0, 0.0, 0.0])
        assert H[1, 1] == pytest.approx(-2.0)

    def test_matches_christoffel_definition(self):
        # Hess h_ij = h_ij - Gamma^k_ij h_k with the closed-form Christoffels
        s = Signature.parse("+-++")
        psi, h = r_over_one_plus_r(), RadialProfile("h", lambda r: r * r * 0.3 + r)
        p = point_with_invariant(0.8, s)
        G = conformal_christoffels(psi, s, p)
        dh = radial_derivatives(h, s, p)
        expected = dh.hess - np.einsum("kij,k->ij", G, dh.grad)
        assert np.allclose(conformal_hessian(h, psi, s, p), expected, atol=1e-13)


class TestRicciAndScalar:
    def test_constant_factor_is_flat(self):
        assert np.all(conformal_ricci(constant_profile(2.0), E3, [0.1, 0.2, 0.3]) == 0.0)

    @pytest.mark.parametrize("r", [0.3, 1.0, 4.0])
    def test_linear_profile_trace_vanishes(self, r):
        p = point_with_invariant(r, E4)
        ric = conformal_ricci(linear_profile(2.0), E4, p)
        assert abs(metric_trace(ric, 2.0 * r, E4)) < 1e-12

    def test_cylinder_trace_in_three_dimensions(self):
        ric = conformal_ricci(cylinder_profile(), E3, [1.0, 0.0, 0.0])
        assert metric_trace(ric, 1.0, E3) == pytest.approx(2.0, rel=1e-12)

    def test_flat(self):
        assert scalar_curvature(ONE, E3, [0.5, 0.5, 0.5]) == 0.0

    def test_hand_expanded_zero(self):
        p = point_with_invariant(1.0, E4)
        assert abs(scalar_curvature(r_over_one_plus_r(), E4, p)) < 1e-14

    @pytest.mark.parametrize("r", [0.2, 1.0, 3.0, 9.0])
    def test_cylinder_n4(self, r):
        assert scalar_curvature(cylinder_profile(), E4, point_with_invariant(r, E4)) == pytest.approx(
            6.0, rel=1e-12
        )

    @pytest.mark.parametrize("sig", ["+++", "++++", "+++-", "++-+-"])
    @pytest.mark.parametrize("r", [0.4, 2.5])
    def test_scalar_equals_trace_of_ricci(self, sig, r):
        s = Signature.parse(sig)
        prof = kazdan_negative_profile(s.n)
        p = point_with_invariant(r, s, spread=0.3)
        ric = conformal_ricci(prof, s, p)
        trace = metric_trace(ric, prof(r).v, s)
        closed = scalar_curvature(prof, s, p)
        assert closed == pytest.approx(trace, rel=1e-9, abs=1e-13)

    def test_depends_only_on_r(self):
        s = Signature.parse("++++")
        prof = kazdan_negative_profile(4)
        rng = np.random.default_rng(3)
        values = []
        for _ in range(5):
            x = rng.normal(size=4)
            x *= math.sqrt(1.7) / np.linalg.norm(x)
            values.append(scalar_curvature(prof, s, x))
        assert max(values) - min(values) <= 1e-12 * max(1.0, abs(values[0]))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            scalar_curvature(ONE, E3, [1.0, 2.0])


class TestRadialScalarCurvature:
    @pytest.mark.parametrize("r", [0.1, 1.0, 12.0])
    def test_linear(self, r):
        # the two terms are each ~ 4 n (n-1) k2^2 r and cancel
        scale = 4 * 5 * 4 * 9.0 * r
        assert abs(radial_scalar_curvature(linear_profile(3.0), 5, r)) <= 1e-14 * scale

    def test_cylinder_n3(self):
        assert radial_scalar_curvature(cylinder_profile(), 3, 7.0) == pytest.approx(2.0, rel=1e-13)

    def test_negative_profile_at_one(self):
        prof = kazdan_negative_profile(3)
        k = radial_scalar_curvature(prof, 3, 1.0)
        assert k < 0
        s = E3
        p = point_with_invariant(1.0, s)
        assert fd_scalar_curvature(fd_metric(prof, s), p) == pytest.approx(k, rel=1e-4)

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    @pytest.mark.parametrize("r", [0.3, 1.1, 6.0])
    def test_agrees_with_cartesian(self, n, r):
        prof = RadialProfile("mix", lambda t: jet_pow(t, 0.75) + 0.2 * t * t + 1.0)
        s = Signature.riemannian(n)
        cart = scalar_curvature(prof, s, point_with_invariant(r, s))
        assert radial_scalar_curvature(prof, n, r) == pytest.approx(cart, rel=1e-12)


class TestExtendedPrecision:
    def test_family_near_sphere(self):
        # terms of size ~1e10 cancel; 40 digits leave the zero exact to ~1e-30
        fam = ZeroCurvatureFamily(-1.0, 2.0, 3).profile()
        with mpmath.workdps(40):
            r = mpmath.mpf("0.928")
            x = [mpmath.sqrt(r / 3)] * 3
            k = scalar_curvature(fam, E3, x)
        assert abs(k) < 1e-25
