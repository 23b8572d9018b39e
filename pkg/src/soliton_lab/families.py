"""Closed-form radial metric families.

* the zero-scalar-curvature family ``psi = k2 r / (1 + A r^m)^(1/m)``
  with ``m = (n-2)/2``, together with its singular set;
* the Bernoulli equation satisfied by ``y = psi'/psi`` and an adaptive
  Runge-Kutta solver for it;
* the cylinder profile ``sqrt(r)`` (constant positive curvature);
* an explicit complete profile with negative scalar curvature;
* the triple of complete metrics with positive, negative and zero
  scalar curvature on ``R^n \\ {0}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import BlowUpError, DomainError, SingularLocusError, SolitonLabError
from .geometry import RadialProfile, radial_scalar_curvature
from .jet import Jet2, jet_exp, jet_pow, lift_var

POSITIVE_CURVATURE_TOL = 1e-9
ZERO_CURVATURE_TOL = 1e-8


def log_grid(rmin: float = 0.1, rmax: float = 10.0, count: int = 32) -> np.ndarray:
    return np.geomspace(rmin, rmax, count)


# ---------------------------------------------------------------------------
# Zero scalar curvature family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SingularSet:
    """Origin, plus a round sphere of coordinate radius ``sphere_radius`` when ``A < 0``."""

    has_origin: bool = True
    sphere_radius: float | None = None

    @property
    def sphere_r(self) -> float | None:
        """The sphere expressed in the radial invariant, ``R**2``."""
        return None if self.sphere_radius is None else self.sphere_radius**2


@dataclass(frozen=True)
class ZeroCurvatureFamily:
    A: float
    k2: float
    n: int

    def __post_init__(self):
        if not self.k2 > 0:
            raise ValueError(f"k2 must be positive, got {self.k2}")
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"n must be an integer >= 3, got {self.n}")
        if not math.isfinite(self.A):
            raise ValueError("A must be finite")

    @property
    def name(self) -> str:
        return f"family(A={self.A:g},k2={self.k2:g},n={self.n})"

    def singular_set(self) -> SingularSet:
        return singular_set(self)

    def domain(self) -> tuple[float, float]:
        ss = self.singular_set()
        return (0.0, math.inf if ss.sphere_r is None else ss.sphere_r)

    def profile(self) -> RadialProfile:
        ss = self.singular_set()
        sing = () if ss.sphere_r is None else (ss.sphere_r,)
        return RadialProfile(self.name, lambda r: _family_expr(self, r), self.domain(), sing)

    def psi(self, r: float) -> Jet2:
        return family_psi(self, r)


def _family_expr(f: ZeroCurvatureFamily, r: Jet2) -> Jet2:
    m = Fraction(f.n - 2, 2)
    base = 1.0 + f.A * jet_pow(r, m)
    if base.v <= 0.0:
        raise SingularLocusError(
            f"1 + A r^{m} = {float(base.v):.3g} <= 0 at r={float(r.v)!r}: "
            "on or beyond the singular sphere"
        )
    return f.k2 * r * jet_pow(base, -1 / m)


def family_psi(f: ZeroCurvatureFamily, r: float) -> Jet2:
    """Jet of ``k2 r (1 + A r^m)^(-1/m)``, ``m = (n-2)/2``."""
    if not r > 0:
        raise DomainError(f"family is defined for r > 0, got {r!r}")
    return _family_expr(f, lift_var(r))


def singular_set(f: ZeroCurvatureFamily) -> SingularSet:
    if f.A < 0:
        return SingularSet(True, (-1.0 / f.A) ** (1.0 / (f.n - 2)))
    return SingularSet(True, None)


# ---------------------------------------------------------------------------
# Bernoulli equation for y = psi'/psi
# ---------------------------------------------------------------------------


def bernoulli_rhs(n: int, r: float, y: float) -> float:
    """``y' = -(n / 2r) y + ((n-2)/2) y**2``."""
    return -(n / (2.0 * r)) * y + 0.5 * (n - 2) * y * y


def bernoulli_constant(n: int, r0: float, y0: float) -> float:
    """The ``A`` in ``1/y = A r^(n/2) + r`` through ``(r0, y0)``."""
    return (1.0 / y0 - r0) / r0 ** (n / 2.0)


def bernoulli_closed_form(n: int, A: float, r: float) -> float:
    inv = A * r ** (n / 2.0) + r
    if inv == 0.0:
        raise BlowUpError(f"closed form blows up at r={r}")
    return 1.0 / inv


def solve_bernoulli(
    n: int,
    r0: float,
    y0: float,
    r1: float,
    rtol: float = 1e-10,
    atol: float = 1e-10,
    blowup: float = 1e12,
) -> float:
    """Integrate the Bernoulli equation from ``(r0, y0)`` to ``r1``.

    Uses an adaptive eighth-order Runge-Kutta scheme. Raises
    :class:`BlowUpError` if ``|y|`` exceeds ``blowup`` (``1/y`` crossing
    zero) before ``r1``.
    """
    if not (r0 > 0 and r1 > 0):
        raise DomainError(f"need r0, r1 > 0, got {r0}, {r1}")
    if r0 == r1:
        return float(y0)

    def escape(r, y):
        return abs(y[0]) - blowup

    escape.terminal = True

    sol = solve_ivp(
        lambda r, y: [bernoulli_rhs(n, r, y[0])],
        (r0, r1),
        [y0],
        method="DOP853",
        rtol=rtol,
        atol=atol,
        events=escape,
    )
    if sol.status == 1 or not sol.success:
        where = sol.t[-1] if sol.t.size else r0
        raise BlowUpError(f"Bernoulli solution escapes near r={where:.6g} ({sol.message})")
    return float(sol.y[0, -1])


def log_derivative(psi: Jet2) -> tuple[float, float]:
    """``(y, y')`` for ``y = psi'/psi`` from a jet of ``psi``."""
    y = psi.d1 / psi.v
    return y, psi.d2 / psi.v - y * y


# ---------------------------------------------------------------------------
# Positive and negative legs
# ---------------------------------------------------------------------------


def cylinder_psi(r: float) -> Jet2:
    """Jet of ``sqrt(r)``; ``g / r`` is the round cylinder ``S^{n-1} x R``."""
    if not r > 0:
        raise DomainError(f"cylinder profile needs r > 0, got {r!r}")
    return jet_pow(lift_var(r), Fraction(1, 2))


def cylinder_profile() -> RadialProfile:
    return RadialProfile("cylinder", lambda r: jet_pow(r, Fraction(1, 2)))


NEGATIVE_VARIANTS = ("half-power", "swapped")


def _negative_expr(n: int, r: Jet2, variant: str) -> Jet2:
    m = Fraction(n - 2, 2)
    if variant == "half-power":
        inner = jet_pow(1.0 + jet_pow(r, m), 1 / m)
    elif variant == "swapped":
        inner = jet_pow(1.0 + jet_pow(r, 1 / m), m)
    else:
        raise ValueError(f"unknown variant {variant!r}, expected one of {NEGATIVE_VARIANTS}")
    return r * jet_exp(-inner)


def kazdan_negative_phi(n: int, r: float, variant: str = "half-power") -> Jet2:
    """Jet of ``r exp(-(1 + r^m)^(1/m))``, ``m = (n-2)/2``.

    ``variant="swapped"`` exchanges the two exponents, giving
    ``r exp(-(1 + r^(1/m))^m)``; the two coincide for ``n = 4``. Only the
    default variant has negative scalar curvature for every ``n >= 3``.
    """
    if not r > 0:
        raise DomainError(f"negative-curvature profile needs r > 0, got {r!r}")
    return _negative_expr(n, lift_var(r), variant)


def kazdan_negative_profile(n: int, variant: str = "half-power") -> RadialProfile:
    suffix = "" if variant == "half-power" else f",{variant}"
    return RadialProfile(f"negative(n={n}{suffix})", lambda r: _negative_expr(n, r, variant))


def negative_leg_curvature(n: int, r: float) -> float:
    """Closed form of the scalar curvature of ``g / phi**2`` for the default variant.

    With ``s = r^m`` and ``x = (1 + s)^(1/m)``:
    ``K = -4(n-1) r^(n-1) x e^(-2x) [(n-2) x - (n-4)] / (1 + s)^2``,
    negative because ``x >= 1`` makes the bracket at least 2.
    """
    m = (n - 2) / 2.0
    s = r**m
    x = (1.0 + s) ** (1.0 / m)
    return -4.0 * (n - 1) * r ** (n - 1) * x * math.exp(-2.0 * x) * ((n - 2) * x - (n - 4)) / (
        1.0 + s
    ) ** 2


def negative_leg_curvature_alternatives(n: int, r: float) -> dict[str, float]:
    """Two further closed-form expressions in circulation for the same curvature.

    Kept so reports can show how far each departs from the radial formula:
    ``weighted`` multiplies ``-4(n-1) r^(n-1) (1+s)^(2(3-n)/(n-2)) e^(-2x)``
    into ``[(n-2)x + 2(n-1) r^(-m) + (n+2)]``; ``grouped`` is the same with
    ``e^(-x)`` in place of ``e^(-2x)``.
    """
    m = (n - 2) / 2.0
    s = r**m
    x = (1.0 + s) ** (1.0 / m)
    bracket = (n - 2) * x + 2 * (n - 1) * r ** (-m) + (n + 2)
    pref = -4.0 * (n - 1) * r ** (n - 1) * (1.0 + s) ** (2.0 * (3 - n) / (n - 2))
    return {
        "weighted": pref * math.exp(-2.0 * x) * bracket,
        "grouped": pref * math.exp(-x) * bracket,
    }


# ---------------------------------------------------------------------------
# Curvature sign verification on grids
# ---------------------------------------------------------------------------


@dataclass
class LegReport:
    """Curvature of one profile sampled on a grid and checked against an expected sign."""

    label: str
    profile: str
    expected: str  # "positive", "negative" or "zero"
    samples: list[tuple[float, float]] = field(default_factory=list)
    skipped: list[tuple[float, str]] = field(default_factory=list)
    passed: bool = False
    detail: str = ""

    @property
    def curvatures(self) -> list[float]:
        return [k for _, k in self.samples]


def sample_curvature(
    profile: RadialProfile, n: int, grid: Sequence[float]
) -> tuple[list[tuple[float, float]], list[tuple[float, str]]]:
    """Radial scalar curvature on ``grid``; evaluation failures are skipped and recorded."""
    samples, skipped = [], []
    for r in grid:
        r = float(r)
        try:
            samples.append((r, radial_scalar_curvature(profile, n, r)))
        except SolitonLabError as exc:
            skipped.append((r, str(exc)))
    return samples, skipped


def verify_leg(
    label: str,
    profile: RadialProfile,
    n: int,
    grid: Sequence[float],
    expected: str,
    target: float | None = None,
) -> LegReport:
    samples, skipped = sample_curvature(profile, n, grid)
    rep = LegReport(label, profile.name, expected, samples, skipped)
    ks = rep.curvatures
    if not ks:
        rep.detail = "no admissible grid points"
        return rep
    if expected == "positive":
        err = max(abs(k - target) for k in ks)
        rep.passed = min(ks) > 0 and err <= POSITIVE_CURVATURE_TOL
        rep.detail = f"max |K - {target:g}| = {err:.3e}"
    elif expected == "negative":
        rep.passed = max(ks) < 0
        rep.detail = f"max K = {max(ks):.6e}"
    elif expected == "zero":
        err = max(abs(k) for k in ks)
        rep.passed = err < ZERO_CURVATURE_TOL
        rep.detail = f"max |K| = {err:.3e}"
    else:
        raise ValueError(f"unknown expectation {expected!r}")
    return rep


@dataclass
class KazdanTriple:
    n: int
    positive: LegReport
    negative: LegReport
    zero: LegReport

    @property
    def legs(self) -> tuple[LegReport, LegReport, LegReport]:
        return (self.positive, self.negative, self.zero)

    @property
    def passed(self) -> bool:
        return all(leg.passed for leg in self.legs)


def kazdan_triple(
    n: int, A: float = 1.0, k2: float = 1.0, grid: Sequence[float] | None = None
) -> KazdanTriple:
    """Three complete metrics on ``R^n \\ {0}`` with K > 0, K < 0 and K = 0."""
    if n < 3:
        raise ValueError("n must be >= 3")
    if not A > 0:
        raise ValueError("the zero leg needs A > 0 to be complete")
    grid = log_grid() if grid is None else grid
    pos = verify_leg(
        "positive", cylinder_profile(), n, grid, "positive", float((n - 1) * (n - 2))
    )
    neg = verify_leg("negative", kazdan_negative_profile(n), n, grid, "negative")
    zero = verify_leg("zero", ZeroCurvatureFamily(A, k2, n).profile(), n, grid, "zero")
    return KazdanTriple(n, pos, neg, zero)
