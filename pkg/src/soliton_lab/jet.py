"""Second-order forward-mode automatic differentiation in one variable.

A :class:`Jet2` carries ``(f, f', f'')`` of a scalar function at a point.
Arithmetic on jets propagates the Leibniz and chain rules exactly, so a
profile written once as ordinary arithmetic yields its first and second
derivatives to machine precision. Fields are floats; seeding with an
``mpmath.mpf`` carries the whole computation at the current mpmath
precision instead.

>>> r = lift_var(3.0)
>>> r * r
Jet2(v=9.0, d1=6.0, d2=2.0)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

import mpmath

from .errors import DomainError, EvaluationError, JetDivisionByZero

Number = Union[int, float, mpmath.mpf]


def _real(x):
    # ints become floats; mpmath reals are kept for extended-precision runs
    return x if isinstance(x, mpmath.mpf) else float(x)


def _exp(x):
    return mpmath.exp(x) if isinstance(x, mpmath.mpf) else math.exp(x)


def _log(x):
    return mpmath.log(x) if isinstance(x, mpmath.mpf) else math.log(x)


@dataclass(frozen=True)
class Jet2:
    """Value, first and second derivative of a scalar function of ``r``."""

    v: float
    d1: float = 0.0
    d2: float = 0.0

    def is_finite(self) -> bool:
        return all(mpmath.isfinite(x) for x in (self.v, self.d1, self.d2))

    def __add__(self, other):
        return jet_binary("add", self, _as_jet(other))

    def __radd__(self, other):
        return jet_binary("add", _as_jet(other), self)

    def __sub__(self, other):
        return jet_binary("sub", self, _as_jet(other))

    def __rsub__(self, other):
        return jet_binary("sub", _as_jet(other), self)

    def __mul__(self, other):
        return jet_binary("mul", self, _as_jet(other))

    def __rmul__(self, other):
        return jet_binary("mul", _as_jet(other), self)

    def __truediv__(self, other):
        return jet_binary("div", self, _as_jet(other))

    def __rtruediv__(self, other):
        return jet_binary("div", _as_jet(other), self)

    def __neg__(self):
        return Jet2(-self.v, -self.d1, -self.d2)

    def __pow__(self, p):
        return jet_pow(self, p)


def lift_const(c: Number) -> Jet2:
    return Jet2(_real(c), 0.0, 0.0)


def lift_var(r0: Number) -> Jet2:
    """The identity function ``r`` seeded at ``r0``."""
    return Jet2(_real(r0), 1.0, 0.0)


def _as_jet(x) -> Jet2:
    if isinstance(x, Jet2):
        return x
    if isinstance(x, (int, float, mpmath.mpf)):
        return lift_const(x)
    return NotImplemented


def jet_binary(op: str, a: Jet2, b: Jet2) -> Jet2:
    """Combine two jets with ``op`` in ``{"add", "sub", "mul", "div"}``.

    Raises :class:`JetDivisionByZero` for ``div`` when ``b.v == 0``.
    """
    if op == "add":
        return Jet2(a.v + b.v, a.d1 + b.d1, a.d2 + b.d2)
    if op == "sub":
        return Jet2(a.v - b.v, a.d1 - b.d1, a.d2 - b.d2)
    if op == "mul":
        return Jet2(
            a.v * b.v,
            a.d1 * b.v + a.v * b.d1,
            a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2,
        )
    if op == "div":
        if b.v == 0.0:
            raise JetDivisionByZero("division by a jet with zero value")
        # q = a/b  =>  a = q b, differentiate twice and solve for q', q''
        q = a.v / b.v
        q1 = (a.d1 - q * b.d1) / b.v
        q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.v
        return Jet2(q, q1, q2)
    raise ValueError(f"unknown jet operation {op!r}")


def compose(a: Jet2, f0: float, f1: float, f2: float) -> Jet2:
    """Chain rule: jet of ``f(a(r))`` given ``f, f', f''`` evaluated at ``a.v``."""
    return Jet2(f0, f1 * a.d1, f2 * a.d1 * a.d1 + f1 * a.d2)


def _int_pow(a: Jet2, k: int) -> Jet2:
    result = lift_const(1.0)
    base = a
    while k:
        if k & 1:
            result = result * base
        k >>= 1
        if k:
            base = base * base
    return result


def jet_pow(a: Jet2, p: Number | Fraction) -> Jet2:
    """Jet of ``a**p``.

    Integer exponents use repeated multiplication and so accept negative
    bases. Non-integer exponents require ``a.v > 0``. Pass a ``Fraction``
    to keep a rational exponent exact under extended precision.
    """
    if isinstance(p, Fraction):
        integral = p.denominator == 1
    else:
        integral = float(p).is_integer()
    if integral:
        k = int(p)
        if k >= 0:
            return _int_pow(a, k)
        if a.v == 0.0:
            raise JetDivisionByZero("negative integer power of a zero jet")
        return lift_const(1.0) / _int_pow(a, -k)
    if a.v <= 0.0:
        raise DomainError(f"non-integer power {p} of non-positive value {a.v}")
    if isinstance(a.v, mpmath.mpf):
        p = mpmath.mpf(p.numerator) / p.denominator if isinstance(p, Fraction) else mpmath.mpf(p)
    else:
        p = float(p)
    try:
        f0 = a.v**p
    except OverflowError as exc:
        raise EvaluationError(f"overflow in {a.v}**{p}") from exc
    f1 = p * f0 / a.v
    f2 = (p - 1.0) * f1 / a.v
    return compose(a, f0, f1, f2)


def jet_exp(a: Jet2) -> Jet2:
    try:
        e = _exp(a.v)
    except OverflowError as exc:
        raise EvaluationError(f"exp overflow at {a.v}") from exc
    return Jet2(e, e * a.d1, e * (a.d1 * a.d1 + a.d2))


def jet_log(a: Jet2) -> Jet2:
    if a.v <= 0.0:
        raise DomainError(f"log of non-positive value {a.v}")
    return compose(a, _log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v))


def jet_sqrt(a: Jet2) -> Jet2:
    return jet_pow(a, 0.5)


def derivatives(fn: Callable[[Jet2], Jet2], r: Number) -> Jet2:
    """Evaluate ``fn`` on the seeded variable at ``r``."""
    return fn(lift_var(r))
