"""Gradient rho-Einstein soliton equations for radial conformal metrics.

For ``gbar = g / psi**2`` with potential ``h``, the soliton equation
``Ric + Hess h = rho K gbar + lambda gbar`` is equivalent (after
multiplying through by ``psi**2``) to a system of PDEs in the Cartesian
derivatives of ``psi`` and ``h``. For radial ``psi(r), h(r)`` it reduces
to two ODEs:

    E1 = (n-2) psi'' + psi h'' + 2 psi' h'
    E2 = 2 psi [(n-2) psi' + psi h'] + 2n [1 - 2(n-1) rho] psi psi'
         + 4r {(n-1)[(rho n - 1) psi'^2 - 2 rho psi psi''] - psi psi' h' + psi psi''}

with the soliton requiring ``E1 = 0`` and ``E2 = lambda``. The PDE and ODE
residuals are tied by

    offdiag_ij    = 4 eps_i eps_j x_i x_j E1
    diag_i / eps_i = (E2 - lambda) + 4 eps_i x_i**2 psi E1

so the diagonal matches the second ODE residual exactly whenever the
first ODE holds.

The remaining functions treat the zero-curvature family, where ``psi`` is
fixed and only ``h'`` and ``lambda`` are free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from .errors import (
    DomainError,
    SingularDenominatorError,
    SingularLocusError,
    SolitonLabError,
)
from .families import ZeroCurvatureFamily, log_grid
from .geometry import (
    RadialProfile,
    Signature,
    _conformal_factor,
    point_with_invariant,
    radial_derivatives,
)
from .jet import Jet2, compose, jet_pow, lift_var

RESIDUAL_TOL = 1e-10
CONSTANCY_TOL = 1e-9
GUARD_BAND = 1e-3


@dataclass(frozen=True)
class SolitonParams:
    n: int
    rho: float
    lam: float
    signature: Signature

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"n must be >= 3, got {self.n}")
        if self.signature.n != self.n:
            raise ValueError(f"signature has n={self.signature.n}, params have n={self.n}")
        if not (math.isfinite(self.rho) and math.isfinite(self.lam)):
            raise ValueError("rho and lambda must be finite")

    @classmethod
    def riemannian(cls, n: int, rho: float, lam: float) -> "SolitonParams":
        return cls(n, rho, lam, Signature.riemannian(n))


# ---------------------------------------------------------------------------
# Residuals
# ---------------------------------------------------------------------------


def index_pairs(n: int, seed: int = 0, limit: int = 30) -> list[tuple[int, int]]:
    """Off-diagonal pairs ``i < j`` to test: all of them up to ``n = 6``, else a seeded sample."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if n <= 6:
        return pairs
    rng = np.random.default_rng(seed)
    pick = rng.choice(len(pairs), size=min(limit, len(pairs)), replace=False)
    return [pairs[k] for k in sorted(pick)]


@dataclass(frozen=True)
class PdeResidual:
    """Residuals of the soliton PDEs at one point (diagonal already has ``lambda eps_i`` removed)."""

    r: float
    offdiag: np.ndarray
    diag: np.ndarray
    pairs: tuple[tuple[int, int], ...]

    @property
    def offdiag_max(self) -> float:
        if not self.pairs:
            return 0.0
        return max(abs(float(self.offdiag[i, j])) for i, j in self.pairs)

    @property
    def diag_max(self) -> float:
        return float(np.max(np.abs(self.diag)))


def pde_residual(
    psi: RadialProfile,
    h: RadialProfile,
    sp: SolitonParams,
    p: Sequence[float],
    pairs: Sequence[tuple[int, int]] | None = None,
) -> PdeResidual:
    dp = _conformal_factor(psi, sp.signature, p)
    dh = radial_derivatives(h, sp.signature, p)
    n, rho = sp.n, sp.rho
    eps = sp.signature.array()
    ps, g, H = dp.jet.v, dp.grad, dp.hess
    hg, hH = dh.grad, dh.hess

    cross = np.outer(g, hg)
    offdiag = (n - 2) * H + ps * hH + cross + cross.T
    np.fill_diagonal(offdiag, 0.0)

    Hd = np.diag(H)
    summand = (n - 1) * (rho * n * g * g - 2 * rho * ps * Hd - g * g) - ps * g * hg + ps * Hd
    total = float(np.dot(eps, summand))
    diag = ps * ((n - 2) * Hd + ps * np.diag(hH) + 2 * g * hg) + eps * total - sp.lam * eps

    pairs = index_pairs(n) if pairs is None else pairs
    return PdeResidual(dp.r, offdiag, diag, tuple(pairs))


def ode_residual(
    psi: RadialProfile, h: RadialProfile, sp: SolitonParams, r: float
) -> tuple[float, float]:
    """``(E1, E2 - lambda)`` at ``r > 0``."""
    if not r > 0:
        raise DomainError(f"ODE residuals need r > 0, got {r!r}")
    return _ode_terms(psi(r), h(r), sp.n, sp.rho, sp.lam, r)


def _ode_terms(P: Jet2, Hj: Jet2, n: int, rho: float, lam: float, r: float) -> tuple[float, float]:
    p0, p1, p2 = P.v, P.d1, P.d2
    h1, h2 = Hj.d1, Hj.d2
    e1 = (n - 2) * p2 + p0 * h2 + 2 * p1 * h1
    e2 = (
        2 * p0 * ((n - 2) * p1 + p0 * h1)
        + 2 * n * (1 - 2 * (n - 1) * rho) * p0 * p1
        + 4
        * r
        * ((n - 1) * ((rho * n - 1) * p1 * p1 - 2 * rho * p0 * p2) - p0 * p1 * h1 + p0 * p2)
    )
    return e1, e2 - lam


@dataclass
class ResidualReport:
    offdiag_max: float = 0.0
    diag_max: float = 0.0
    ode_max: tuple[float, float] = (0.0, 0.0)
    points_tested: int = 0
    tolerance: float = RESIDUAL_TOL
    skipped: list[tuple[float, str]] = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return self.points_tested > 0 and max(
            self.offdiag_max, self.diag_max, *self.ode_max
        ) < self.tolerance


def residual_report(
    psi: RadialProfile,
    h: RadialProfile,
    sp: SolitonParams,
    radii: Sequence[float],
    tolerance: float = RESIDUAL_TOL,
) -> ResidualReport:
    """PDE residuals at one generic point per radius plus ODE residuals at that radius."""
    rep = ResidualReport(tolerance=tolerance)
    o1 = o2 = 0.0
    for r in radii:
        r = float(r)
        try:
            p = point_with_invariant(r, sp.signature)
            pde = pde_residual(psi, h, sp, p)
            e1, e2 = ode_residual(psi, h, sp, r)
        except SolitonLabError as exc:
            rep.skipped.append((r, str(exc)))
            continue
        rep.offdiag_max = max(rep.offdiag_max, pde.offdiag_max)
        rep.diag_max = max(rep.diag_max, pde.diag_max)
        o1, o2 = max(o1, abs(e1)), max(o2, abs(e2))
        rep.points_tested += 1
    rep.ode_max = (o1, o2)
    return rep


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    kind: str
    tag: str | None

    def __str__(self) -> str:
        return self.kind if self.tag is None else f"{self.kind}, {self.tag}"


def classify(sp: SolitonParams) -> Classification:
    if sp.lam > 0:
        kind = "shrinking"
    elif sp.lam < 0:
        kind = "expanding"
    else:
        kind = "steady"
    n = sp.n
    special = (
        (0.0, "Ricci"),
        (0.5, "Einstein"),
        (1.0 / n, "traceless"),
        (1.0 / (2 * (n - 1)), "Schouten"),
    )
    tag = next((name for value, name in special if math.isclose(sp.rho, value, abs_tol=1e-12)), None)
    return Classification(kind, tag)


# ---------------------------------------------------------------------------
# Zero-curvature family: lambda(r), h'(r) and rigidity
# ---------------------------------------------------------------------------


def _B(A: float, n: int, r: float) -> float:
    if not r > 0:
        raise DomainError(f"need r > 0, got {r!r}")
    B = A + r ** ((2 - n) / 2)
    if B == 0.0:
        raise SingularLocusError(f"B = A + r^((2-n)/2) vanishes at r={r!r}")
    if B < 0.0:
        raise DomainError(f"B = {B:.6g} < 0 at r={r!r}: beyond the singular sphere")
    return B


def _vanishes(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-13 * (abs(a) + abs(b))


def lambda_profile(A: float, k2: float, n: int, r: float) -> float:
    """The closed-form candidate for ``lambda(r)`` on the zero-curvature family.

    ``(n-2)^2 k2^2 (B^((n+1)/(2-n)) r^(-n/2) - B^((2n-1)/(2-n)) r^(1-n))^2
    / (n B^(n/(2-n)) r^(-n/2) - (n+2) B^(2(n-1)/(2-n)) r^(1-n))``,
    ``B = A + r^((2-n)/2)``. It vanishes identically exactly when ``A = 0``.
    See :func:`lambda_from_odes` for the value forced by the ODE system.
    """
    if not k2 > 0:
        raise DomainError(f"k2 must be positive, got {k2}")
    B = _B(A, n, r)
    q = 2 - n
    num = B ** ((n + 1) / q) * r ** (-n / 2) - B ** ((2 * n - 1) / q) * r ** (1 - n)
    t1 = n * B ** (n / q) * r ** (-n / 2)
    t2 = (n + 2) * B ** (2 * (n - 1) / q) * r ** (1 - n)
    if _vanishes(t1, t2):
        raise SingularDenominatorError(f"lambda denominator vanishes at r={r!r}", r)
    return (n - 2) ** 2 * k2 * k2 * num * num / (t1 - t2)


def lambda_polynomial(A: float, n: int, r: float) -> float:
    """``A^2 [-n^2 r^((n-2)/2) A^2 + (n^2+4) A + 4(1-n) r^((2-n)/2)]``."""
    s = r ** ((n - 2) / 2)
    return A * A * (-n * n * s * A * A + (n * n + 4) * A + 4 * (1 - n) / s)


def _slope_parts(A: float, k2: float, n: int, r: Jet2) -> tuple[Jet2, Jet2]:
    """``(a, w)`` with ``h' = lambda a + w`` as jets in ``r``."""
    q = 2 - n
    B = A + jet_pow(r, (2 - n) / 2)
    if B.v == 0.0:
        raise SingularLocusError(f"B vanishes at r={r.v!r}")
    if B.v < 0.0:
        raise DomainError(f"B < 0 at r={r.v!r}: beyond the singular sphere")
    b2 = jet_pow(B, 2 / q)
    t1 = b2
    t2 = 2.0 * jet_pow(B, n / q) * jet_pow(r, (2 - n) / 2)
    if _vanishes(t1.v, t2.v):
        raise SingularDenominatorError(f"h' denominator vanishes at r={r.v!r}", r.v)
    D = t1 - t2
    a = 1.0 / (2.0 * k2 * k2 * b2 * D)
    w = (2 - n) * (
        jet_pow(B, n / q) * jet_pow(r, -n / 2) - jet_pow(B, 2 * (n - 1) / q) * jet_pow(r, 1 - n)
    ) / D
    return a, w


def potential_slope_jet(A: float, k2: float, n: int, lam: float, r: float) -> Jet2:
    """Jet ``(h', h'', h''')`` of the potential slope solving the second ODE."""
    if not r > 0:
        raise DomainError(f"need r > 0, got {r!r}")
    a, w = _slope_parts(A, k2, n, lift_var(r))
    return lam * a + w


def potential_slope(A: float, k2: float, n: int, lam: float, r: float) -> float:
    """``h'(r)`` making ``E2 = lambda`` hold on the zero-curvature family.

    ``h' = lambda / (2 k2^2 B^(2/(2-n)) D) + (2-n)(B^(n/(2-n)) r^(-n/2)
    - B^(2(n-1)/(2-n)) r^(1-n)) / D`` with ``D = B^(2/(2-n)) - 2 B^(n/(2-n)) r^((2-n)/2)``.
    ``D`` vanishes at ``r = A^(-2/(n-2))`` when ``A > 0``.
    """
    return potential_slope_jet(A, k2, n, lam, r).v


class LambdaUndetermined(SingularDenominatorError):
    """The first ODE holds for every ``lambda`` at this ``r`` (happens for ``A = 0``)."""


def lambda_from_odes(A: float, k2: float, n: int, r: float) -> float:
    """The ``lambda`` for which ``h'`` from :func:`potential_slope` also solves the first ODE at ``r``.

    ``E1`` is affine in ``lambda``; solve it with jets of ``psi``, ``a`` and ``w``.
    """
    if not r > 0:
        raise DomainError(f"need r > 0, got {r!r}")
    P = ZeroCurvatureFamily(A, k2, n).psi(r)
    a, w = _slope_parts(A, k2, n, lift_var(r))
    # E1 = (n-2) psi'' + psi (lam a' + w') + 2 psi' (lam a + w)
    c1, c2 = P.v * a.d1, 2 * P.d1 * a.v
    coeff = c1 + c2
    rest = (n - 2) * P.d2 + P.v * w.d1 + 2 * P.d1 * w.v
    if abs(coeff) <= 1e-10 * (abs(c1) + abs(c2)):
        raise LambdaUndetermined(f"first ODE does not involve lambda at r={r!r}", r)
    return -rest / coeff


def singular_radii(A: float, n: int) -> dict[str, float]:
    """Values of ``r`` where the family or the closed forms above degenerate."""
    out = {}
    if A < 0:
        out["sphere"] = (-1.0 / A) ** (2.0 / (n - 2))
    if A > 0:
        out["lambda_denominator"] = (n * A / 2.0) ** (-2.0 / (n - 2))
        out["slope_denominator"] = A ** (-2.0 / (n - 2))
    return out


def guarded_grid(
    A: float,
    n: int,
    grid: Sequence[float] | None = None,
    band: float = GUARD_BAND,
    avoid: Sequence[str] = ("sphere", "lambda_denominator"),
) -> tuple[list[float], list[tuple[float, str]]]:
    """Drop grid points within a relative ``band`` of the singular radii named in ``avoid``.

    Points on or beyond the singular sphere are always dropped.
    """
    grid = log_grid() if grid is None else grid
    sing = singular_radii(A, n)
    kept, dropped = [], []
    for r in grid:
        r = float(r)
        reason = None
        if "sphere" in sing and r >= sing["sphere"] * (1 - band):
            reason = f"on or beyond the singular sphere r={sing['sphere']:.6g}"
        for label in avoid:
            rs = sing.get(label)
            if reason is None and rs is not None and abs(r - rs) <= band * rs:
                reason = f"within guard band of {label} r={rs:.6g}"
        if reason is None:
            kept.append(r)
        else:
            dropped.append((r, reason))
    return kept, dropped


@dataclass
class RigidityVerdict:
    A: float
    k2: float
    n: int
    lambda_samples: list[tuple[float, float]]
    is_constant: bool
    forced_lambda: float | None
    spread: float
    polynomial_samples: list[tuple[float, float]]
    polynomial_vanishes: bool
    ode_lambda_samples: list[tuple[float, float]]
    ode_is_constant: bool
    ode_lambda_free: int = 0
    skipped: list[tuple[float, str]] = field(default_factory=list)
    tolerance: float = CONSTANCY_TOL


def _constant(values: Sequence[float], tol: float) -> tuple[bool, float]:
    spread = max(values) - min(values)
    mean = sum(values) / len(values)
    return spread < tol * (1 + abs(mean)), spread


def rigidity_scan(
    A: float,
    k2: float,
    n: int,
    grid: Sequence[float] | None = None,
    tol: float = CONSTANCY_TOL,
) -> RigidityVerdict:
    """Sample ``lambda(r)`` on the family and decide whether it is constant.

    A soliton needs constant ``lambda``; on the zero-curvature family that
    happens only for ``A = 0``, and then ``lambda = 0`` (steady).
    """
    radii, skipped = guarded_grid(A, n, grid)
    near_slope = {r for r, _ in guarded_grid(A, n, radii, avoid=("slope_denominator",))[1]}
    lam, poly, ode = [], [], []
    free = 0
    for r in radii:
        try:
            lam.append((r, lambda_profile(A, k2, n, r)))
        except SolitonLabError as exc:
            skipped.append((r, f"lambda: {exc}"))
            continue
        poly.append((r, lambda_polynomial(A, n, r)))
        if r in near_slope:
            skipped.append((r, "ode lambda: within guard band of the slope singularity"))
            continue
        try:
            ode.append((r, lambda_from_odes(A, k2, n, r)))
        except LambdaUndetermined:
            free += 1
        except SolitonLabError as exc:
            skipped.append((r, f"ode lambda: {exc}"))
    if len(lam) < 2:
        raise DomainError(f"fewer than two admissible grid points for A={A}, n={n}")
    is_const, spread = _constant([v for _, v in lam], tol)
    ode_const = len(ode) >= 2 and _constant([v for _, v in ode], tol)[0]
    vanishes = max(abs(v) for _, v in poly) <= 1e-12
    return RigidityVerdict(
        A=A,
        k2=k2,
        n=n,
        lambda_samples=lam,
        is_constant=is_const,
        forced_lambda=0.0 if is_const else None,
        spread=spread,
        polynomial_samples=poly,
        polynomial_vanishes=vanishes,
        ode_lambda_samples=ode,
        ode_is_constant=ode_const,
        ode_lambda_free=free,
        skipped=sorted(skipped),
        tolerance=tol,
    )


def gaussian_potential_profile(k2: float, lam: float) -> RadialProfile:
    """``h = lambda / (2 k2^2 r)``: with ``psi = k2 r`` this solves both ODEs for any ``lambda``.

    ``g / (k2 r)^2`` is flat (an inversion of the background), and in the
    inverted coordinates ``h`` is the quadratic potential of a Gaussian soliton.
    """
    if not k2 > 0:
        raise DomainError(f"k2 must be positive, got {k2}")
    c = lam / (2.0 * k2 * k2)
    return RadialProfile(f"gaussian(k2={k2:g},lambda={lam:g})", lambda r: c / r)


# ---------------------------------------------------------------------------
# Potential reconstructed from its slope
# ---------------------------------------------------------------------------


def _admissible_interval(A: float, n: int, r_ref: float) -> tuple[float, float]:
    lo, hi = 0.0, math.inf
    sing = singular_radii(A, n)
    for rs in (sing.get("sphere"), sing.get("slope_denominator")):
        if rs is None:
            continue
        if rs < r_ref:
            lo = max(lo, rs)
        elif rs > r_ref:
            hi = min(hi, rs)
        else:
            raise DomainError(f"reference radius {r_ref} is singular")
    return lo, hi


def potential_profile(
    A: float, k2: float, n: int, lam: float, r_ref: float = 1.0
) -> RadialProfile:
    """``h(r) = integral from r_ref to r of h'``; derivatives come from the slope jet.

    The value needs quadrature; ``h'`` and ``h''`` are exact.
    """
    lo, hi = _admissible_interval(A, n, r_ref)

    def slope(t: float) -> float:
        return potential_slope(A, k2, n, lam, t)

    def fn(r: Jet2) -> Jet2:
        x = float(r.v)
        value, _ = quad(slope, r_ref, x, epsabs=1e-13, epsrel=1e-10, limit=200)
        s = potential_slope_jet(A, k2, n, lam, x)
        return compose(r, value, s.v, s.d1)

    return RadialProfile(f"potential(A={A:g},k2={k2:g},n={n},lambda={lam:g})", fn, (lo, hi))
