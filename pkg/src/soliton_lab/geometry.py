"""Closed-form tensor calculus for radial conformal metrics.

The background is pseudo-Euclidean space ``(R^n, g)`` with
``g_ij = eps_i delta_ij`` and the target metric is ``gbar = g / psi(r)**2``
where ``r = sum_i eps_i x_i**2``. Every quantity below is assembled from
the radial jet ``(psi, psi', psi'')`` through

    psi_{,i}  = 2 eps_i x_i psi'
    psi_{,ij} = 4 eps_i eps_j x_i x_j psi'' + 2 eps_i delta_ij psi'

Christoffel arrays are indexed ``[upper, lower, lower]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ConformalFactorZeroError,
    DimensionMismatchError,
    DomainError,
    EvaluationError,
    SingularLocusError,
    SolitonLabError,
)
from .jet import Jet2, lift_const, lift_var


@dataclass(frozen=True)
class Signature:
    """Diagonal signs ``(eps_1, ..., eps_n)`` of the background metric."""

    eps: tuple[int, ...]

    def __post_init__(self):
        eps = tuple(int(e) for e in self.eps)
        if any(e not in (1, -1) for e in self.eps):
            raise ValueError(f"signature entries must be +1 or -1, got {self.eps}")
        if len(eps) < 3:
            raise ValueError(f"dimension must be at least 3, got {len(eps)}")
        object.__setattr__(self, "eps", eps)

    @classmethod
    def riemannian(cls, n: int) -> "Signature":
        return cls((1,) * n)

    @classmethod
    def parse(cls, text: str) -> "Signature":
        """Parse a string such as ``"+++-"`` (unicode minus accepted)."""
        table = {"+": 1, "-": -1, "−": -1}
        try:
            return cls(tuple(table[c] for c in text.strip()))
        except KeyError as exc:
            raise ValueError(f"bad signature character {exc.args[0]!r} in {text!r}") from None

    @property
    def n(self) -> int:
        return len(self.eps)

    @property
    def is_riemannian(self) -> bool:
        return all(e == 1 for e in self.eps)

    def array(self) -> np.ndarray:
        return np.asarray(self.eps, dtype=float)

    def __str__(self) -> str:
        return "".join("+" if e == 1 else "-" for e in self.eps)


@dataclass(frozen=True)
class RadialProfile:
    """A named radial function ``r -> Jet2``.

    ``fn`` receives the seeded jet of ``r`` and is written as ordinary
    arithmetic on jets. ``domain`` is the open interval of admissible
    ``r``; ``singular_r`` lists interior values of ``r`` (besides the
    origin) where the associated metric degenerates.
    """

    name: str
    fn: Callable[[Jet2], Jet2]
    domain: tuple[float, float] = (0.0, math.inf)
    singular_r: tuple[float, ...] = field(default=())

    def in_domain(self, r: float) -> bool:
        lo, hi = self.domain
        return lo < r < hi

    def __call__(self, r: float) -> Jet2:
        if not self.in_domain(r):
            hi = self.domain[1]
            if r >= hi and hi in self.singular_r:
                raise SingularLocusError(
                    f"r={r} is on or beyond the singular sphere r={hi!r} of profile {self.name}"
                )
            raise DomainError(f"r={r} outside domain {self.domain} of profile {self.name}")
        try:
            jet = self.fn(lift_var(r))
        except (OverflowError, ZeroDivisionError) as exc:
            if isinstance(exc, SolitonLabError):
                raise
            raise EvaluationError(f"profile {self.name} failed at r={r}: {exc}") from exc
        if not jet.is_finite():
            raise EvaluationError(f"profile {self.name} is not finite at r={r}: {jet}")
        return jet

    def value(self, r: float) -> float:
        return self(r).v


def constant_profile(c: float, name: str | None = None) -> RadialProfile:
    return RadialProfile(name or f"const({c:g})", lambda _r: lift_const(c), (-math.inf, math.inf))


def linear_profile(k2: float = 1.0, name: str | None = None) -> RadialProfile:
    """``psi(r) = k2 r``: the conformal factor of the flat steady soliton."""
    return RadialProfile(name or f"linear(k2={k2:g})", lambda r: k2 * r)


def _check_point(p: Sequence[float], s: Signature) -> np.ndarray:
    x = np.asarray(p, dtype=float)
    if x.shape != (s.n,):
        raise DimensionMismatchError(f"point has shape {x.shape}, signature has n={s.n}")
    return x


def radial_invariant(p: Sequence[float], s: Signature) -> float:
    """``r = sum_i eps_i x_i**2``."""
    x = _check_point(p, s)
    return float(np.dot(s.array(), x * x))


def point_with_invariant(r: float, s: Signature, spread: float = 0.5) -> np.ndarray:
    """A deterministic point ``x`` with ``radial_invariant(x, s) == r``.

    Timelike coordinates (``eps = -1``) are set to ``spread``; the remaining
    mass is shared by the spacelike coordinates so that generic points are
    produced, not points on a coordinate axis.
    """
    eps = s.array()
    pos = np.flatnonzero(eps > 0)
    if pos.size == 0:
        raise DomainError("signature has no positive entry, r > 0 is unreachable")
    x = np.zeros(s.n)
    x[eps < 0] = spread
    need = r + spread * spread * np.count_nonzero(eps < 0)
    if need <= 0:
        raise DomainError(f"cannot reach r={r} with the given spread")
    weights = np.arange(1, pos.size + 1, dtype=float)
    weights /= weights.sum()
    x[pos] = np.sqrt(need * weights)
    return x


@dataclass(frozen=True)
class RadialDerivatives:
    """Cartesian derivatives of ``x -> f(r(x))`` at one point."""

    r: float
    jet: Jet2
    grad: np.ndarray
    hess: np.ndarray


def radial_derivatives(f: RadialProfile, s: Signature, p: Sequence[float]) -> RadialDerivatives:
    x = _check_point(p, s)
    eps = s.array()
    r = float(np.dot(eps, x * x))
    jet = f(r)
    ex = eps * x
    grad = 2.0 * ex * jet.d1
    hess = 4.0 * jet.d2 * np.outer(ex, ex) + 2.0 * jet.d1 * np.diag(eps)
    return RadialDerivatives(r, jet, grad, hess)


def _conformal_factor(psi: RadialProfile, s: Signature, p) -> RadialDerivatives:
    d = radial_derivatives(psi, s, p)
    if d.jet.v == 0.0:
        raise ConformalFactorZeroError(f"psi vanishes at r={d.r}")
    return d


def conformal_christoffels(psi: RadialProfile, s: Signature, p: Sequence[float]) -> np.ndarray:
    """Christoffel symbols ``G[k, i, j]`` of ``g / psi**2``.

    ``G[k,i,j] = -(delta_jk psi_i + delta_ik psi_j - eps_k eps_i delta_ij psi_k) / psi``
    """
    d = _conformal_factor(psi, s, p)
    n = s.n
    eps = s.array()
    eye = np.eye(n)
    dlog = d.grad / d.jet.v
    term_j = np.einsum("jk,i->kij", eye, dlog)
    term_i = np.einsum("ik,j->kij", eye, dlog)
    term_ij = np.einsum("k,i,ij,k->kij", eps, eps, eye, dlog)
    gamma = -(term_j + term_i - term_ij)
    return 0.5 * (gamma + gamma.transpose(0, 2, 1))


def conformal_hessian(
    h: RadialProfile, psi: RadialProfile, s: Signature, p: Sequence[float]
) -> np.ndarray:
    """Hessian of ``h`` with respect to ``g / psi**2``.

    Off the diagonal this is ``h_ij + (psi_j h_i + psi_i h_j)/psi``; the
    diagonal carries the extra ``-eps_i sum_k eps_k psi_k h_k / psi``.
    """
    dp = _conformal_factor(psi, s, p)
    dh = radial_derivatives(h, s, p)
    eps = s.array()
    cross = np.outer(dh.grad, dp.grad)
    hess = dh.hess + (cross + cross.T) / dp.jet.v
    hess -= np.diag(eps) * (np.dot(eps, dp.grad * dh.grad) / dp.jet.v)
    return hess


def _laplacian_and_gradsq(d: RadialDerivatives, eps: np.ndarray) -> tuple[float, float]:
    lap = float(np.dot(eps, np.diag(d.hess)))
    gradsq = float(np.dot(eps, d.grad * d.grad))
    return lap, gradsq


def conformal_ricci(psi: RadialProfile, s: Signature, p: Sequence[float]) -> np.ndarray:
    """Ricci tensor (covariant components) of ``g / psi**2``."""
    d = _conformal_factor(psi, s, p)
    n = s.n
    eps = s.array()
    lap, gradsq = _laplacian_and_gradsq(d, eps)
    psi0 = d.jet.v
    ric = (n - 2) * psi0 * d.hess + (psi0 * lap - (n - 1) * gradsq) * np.diag(eps)
    return ric / (psi0 * psi0)


def metric_trace(tensor: np.ndarray, psi_value: float, s: Signature) -> float:
    """Trace ``gbar^{ij} T_ij`` with ``gbar^{ij} = psi**2 eps_i delta_ij``."""
    return float(psi_value * psi_value * np.dot(s.array(), np.diag(tensor)))


def scalar_curvature(psi: RadialProfile, s: Signature, p: Sequence[float]) -> float:
    """``(n-1) (2 psi Lap psi - n |grad psi|^2)`` for ``g / psi**2``.

    Written with plain sums so that ``mpmath.mpf`` coordinates carry the
    whole evaluation at extended precision.
    """
    x = list(p)
    n = s.n
    if len(x) != n:
        raise DimensionMismatchError(f"point has {len(x)} coordinates, signature has n={n}")
    r = sum(e * xi * xi for e, xi in zip(s.eps, x))
    j = psi(r)
    lap = sum(e * (4 * xi * xi * j.d2 + 2 * e * j.d1) for e, xi in zip(s.eps, x))
    gradsq = sum(e * (2 * e * xi * j.d1) ** 2 for e, xi in zip(s.eps, x))
    return (n - 1) * (2 * j.v * lap - n * gradsq)


def radial_scalar_curvature(phi: RadialProfile, n: int, r: float) -> float:
    """Scalar curvature of ``g / phi(r)**2`` written in ``r`` alone.

    ``4r[2(n-1) phi phi'' - n(n-1) phi'^2] + 4n(n-1) phi phi'``
    """
    j = phi(r)
    return 4.0 * r * (2 * (n - 1) * j.v * j.d2 - n * (n - 1) * j.d1 * j.d1) + 4 * n * (
        n - 1
    ) * j.v * j.d1
