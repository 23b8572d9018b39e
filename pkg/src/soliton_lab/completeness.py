"""Completeness certificates by comparison with a known-complete metric.

If ``|v|_target >= c |v|_reference`` for some ``c > 0`` and the reference
metric is complete, then so is the target. For conformal metrics
``g / psi**2`` the norms scale as ``|v| = |v|_0 / psi``, so the best
constant is the infimum of

    f(r) = psi_reference(r) / psi_target(r)

over ``r > 0``. The search runs on a log grid over ``[1e-6, 1e6]``,
refines an interior minimum by golden-section search in ``log r`` and a
Newton step on ``f'``, and classifies boundary infima by probing further
toward the end of the range and extrapolating the limit (Aitken's delta
squared).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import CertificationError, ConformalFactorZeroError, SolitonLabError
from .geometry import RadialProfile
from .jet import Jet2

SEARCH_RANGE = (1e-6, 1e6)
SCAN_POINTS = 121
GRID_SLACK = 1e-9
ZERO_BOUND = 1e-12
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_ROOTS = frozenset({"cylinder"})


def comparison_ratio_jet(target: RadialProfile, reference: RadialProfile, r: float) -> Jet2:
    t = target(r)
    if t.v == 0.0:
        raise ConformalFactorZeroError(f"target {target.name} vanishes at r={r!r}")
    return reference(r) / t


def comparison_ratio(target: RadialProfile, reference: RadialProfile, r: float) -> float:
    """``f(r) = reference(r) / target(r)``: the factor with ``|v|_target = f |v|_reference``."""
    return float(comparison_ratio_jet(target, reference, r).v)


def golden_section(
    fn: Callable[[float], float], a: float, b: float, tol: float = 1e-12, max_iter: int = 200
) -> float:
    """Minimizer of a unimodal ``fn`` on ``[a, b]``; ties keep the left point."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * (1.0 + abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fn(d)
    return c if fc <= fd else d


def aitken_limit(values: Sequence[float]) -> tuple[float, float]:
    """Extrapolated limit of a sequence and the change between the last two estimates.

    Falls back to the last term when the differences stop shrinking.
    """
    if len(values) < 3:
        return values[-1], math.inf
    estimates = []
    for s0, s1, s2 in zip(values, values[1:], values[2:]):
        d1, d2 = s1 - s0, s2 - s1
        denom = d2 - d1
        estimates.append(s2 if denom == 0.0 else s2 - d2 * d2 / denom)
    gap = abs(estimates[-1] - estimates[-2]) if len(estimates) > 1 else abs(values[-1] - values[-2])
    return estimates[-1], gap


@dataclass
class LimitProbe:
    end: str  # "lower" or "upper"
    radii: list[float]
    values: list[float]
    monotone: bool
    limit: float
    gap: float


def probe_limit(
    f: Callable[[float], float], end: str, start: float | None = None, steps: int = 5
) -> LimitProbe:
    """Sample ``f`` at ``start * 10^(-k)`` (lower end) or ``start * 10^k`` (upper end).

    The lower end starts at ``r = 1e-8`` and the upper at ``r = 1e8``.
    """
    if end == "lower":
        start = 1e-8 if start is None else start
        radii = [start * 10.0 ** (-k) for k in range(steps)]
    elif end == "upper":
        start = 1e8 if start is None else start
        radii = [start * 10.0**k for k in range(steps)]
    else:
        raise ValueError(f"end must be 'lower' or 'upper', got {end!r}")
    values = [f(r) for r in radii]
    monotone = all(b <= a for a, b in zip(values, values[1:]))
    if monotone:
        limit, gap = aitken_limit(values)
        limit = min(limit, values[-1])
    else:
        limit, gap = min(values), math.inf
    return LimitProbe(end, radii, values, monotone, limit, gap)


@dataclass
class CompletenessCertificate:
    target_id: str
    reference_id: str
    minimizer_r: float | None
    bound_c: float
    attained: bool
    status: str  # "certified" or "not-certified"
    reason: str = ""
    second_derivative: float | None = None
    search_interval: tuple[float, float] = SEARCH_RANGE
    grid_points: int = 0
    grid_min_ratio: float | None = None
    probe: LimitProbe | None = None
    closed_form: dict[str, float] | None = None
    skipped: list[tuple[float, str]] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    def closed_form_gaps(self) -> dict[str, float]:
        """Relative gaps between the numeric result and any supplied closed forms."""
        out = {}
        if not self.closed_form:
            return out
        if "minimizer_r" in self.closed_form and self.minimizer_r is not None:
            ref = self.closed_form["minimizer_r"]
            out["minimizer_r"] = abs(self.minimizer_r - ref) / abs(ref)
        if "bound_c" in self.closed_form:
            ref = self.closed_form["bound_c"]
            out["bound_c"] = abs(self.bound_c - ref) / abs(ref) if ref else abs(self.bound_c)
        return out


def _not_certified(target, reference, reason, **kw) -> CompletenessCertificate:
    kw.setdefault("bound_c", 0.0)
    kw.setdefault("minimizer_r", None)
    kw.setdefault("attained", False)
    return CompletenessCertificate(
        target.name, reference.name, status="not-certified", reason=reason, **kw
    )


def _search_interval(target: RadialProfile, reference: RadialProfile) -> tuple[float, float]:
    lo = max(SEARCH_RANGE[0], target.domain[0], reference.domain[0])
    hi = min(SEARCH_RANGE[1], target.domain[1], reference.domain[1])
    return lo, hi


def _polish(ratio_jet: Callable[[float], Jet2], r: float, lo: float, hi: float) -> float:
    """Newton iterations on ``f'`` kept inside ``[lo, hi]`` and only while ``f'' > 0``."""
    for _ in range(6):
        j = ratio_jet(r)
        if not j.d2 > 0:
            break
        step = j.d1 / j.d2
        nxt = r - step
        if not lo <= nxt <= hi:
            break
        if abs(step) <= 1e-15 * r:
            return nxt
        r = nxt
    return r


def certify(
    target: RadialProfile,
    reference: RadialProfile,
    known_complete: Iterable[str] = DEFAULT_ROOTS,
    closed_form: dict[str, float] | None = None,
    scan_points: int = SCAN_POINTS,
) -> CompletenessCertificate:
    """Bound ``inf_r reference(r)/target(r)`` from below and certify completeness.

    ``reference.name`` must be in ``known_complete``. ``closed_form`` may carry
    ``minimizer_r`` and ``bound_c`` values for comparison; they do not
    influence the numeric result.
    """
    if reference.name not in set(known_complete):
        raise CertificationError(
            f"reference {reference.name!r} is not known to be complete; "
            f"known: {sorted(known_complete)}"
        )
    lo, hi = _search_interval(target, reference)
    if target.domain[1] < math.inf:
        return _not_certified(
            target,
            reference,
            f"target is only defined for r < {target.domain[1]:.6g}",
            search_interval=(lo, hi),
            closed_form=closed_form,
        )

    def ratio(r: float) -> float:
        return comparison_ratio(target, reference, r)

    def ratio_jet(r: float) -> Jet2:
        return comparison_ratio_jet(target, reference, r)

    radii, values, skipped = [], [], []
    for r in np.geomspace(lo, hi, scan_points):
        r = float(r)
        try:
            values.append(ratio(r))
            radii.append(r)
        except SolitonLabError as exc:
            skipped.append((r, str(exc)))
    if len(values) < 3:
        return _not_certified(
            target, reference, "too few admissible scan points", skipped=skipped,
            closed_form=closed_form,
        )
    common = dict(
        search_interval=(lo, hi),
        grid_points=len(values),
        grid_min_ratio=min(values),
        closed_form=closed_form,
        skipped=skipped,
    )
    i = int(np.argmin(values))  # first occurrence: leftmost on ties
    probe = None
    second = None
    if 0 < i < len(values) - 1:
        a, b = math.log(radii[i - 1]), math.log(radii[i + 1])
        r_star = math.exp(golden_section(lambda t: ratio(math.exp(t)), a, b))
        r_star = _polish(ratio_jet, r_star, radii[i - 1], radii[i + 1])
        c = ratio(r_star)
        second = float(ratio_jet(r_star).d2)
        attained = True
    else:
        end = "lower" if i == 0 else "upper"
        probe = probe_limit(ratio, end)
        r_star, c, attained = None, min(probe.limit, values[i]), False

    scale = max(1.0, abs(values[i]))
    if not c > ZERO_BOUND * scale:
        return _not_certified(
            target,
            reference,
            f"infimum of the ratio is {c:.3e}: no positive bound",
            bound_c=max(c, 0.0),
            minimizer_r=r_star,
            probe=probe,
            **common,
        )
    low = min(values)
    if low < c * (1.0 - GRID_SLACK):
        return _not_certified(
            target,
            reference,
            f"grid value {low:.17g} falls below the bound {c:.17g}",
            bound_c=c,
            minimizer_r=r_star,
            probe=probe,
            **common,
        )
    return CompletenessCertificate(
        target.name,
        reference.name,
        minimizer_r=r_star,
        bound_c=c,
        attained=attained,
        status="certified",
        second_derivative=second,
        probe=probe,
        **common,
    )


def certify_chain(
    steps: Sequence[tuple[RadialProfile, RadialProfile]],
    roots: Iterable[str] = DEFAULT_ROOTS,
    closed_forms: Sequence[dict[str, float] | None] | None = None,
) -> list[CompletenessCertificate]:
    """Certify each ``(target, reference)`` in order; certified targets become references."""
    known = set(roots)
    out = []
    forms = closed_forms or [None] * len(steps)
    for (target, reference), cf in zip(steps, forms):
        cert = certify(target, reference, known, closed_form=cf)
        if cert.certified:
            known.add(target.name)
        out.append(cert)
    return out


# ---------------------------------------------------------------------------
# Closed forms for the zero-curvature family against the cylinder
# ---------------------------------------------------------------------------


def family_cylinder_closed_form(A: float, k2: float, n: int) -> dict[str, float]:
    """``r* = A^(-2/(n-2))`` and ``c = (4A)^(1/(n-2)) / k2`` for ``A > 0``."""
    if not A > 0:
        raise ValueError("the ratio has an interior minimum only for A > 0")
    return {
        "minimizer_r": A ** (-2.0 / (n - 2)),
        "bound_c": (4.0 * A) ** (1.0 / (n - 2)) / k2,
    }


def family_cylinder_second_derivative(A: float, k2: float, n: int) -> float:
    """``f''(r*) = 2^((8-3n)/(n-2)) A^(5/(n-2)) (n-2) / k2``."""
    return 2.0 ** ((8.0 - 3 * n) / (n - 2)) * A ** (5.0 / (n - 2)) * (n - 2) / k2
