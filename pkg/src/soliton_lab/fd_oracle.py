"""Brute-force curvature from pointwise metric components.

This module differentiates raw metric components with fourth-order central
differences and assembles Christoffel symbols, Riemann, Ricci and scalar
curvature from the textbook definitions. It deliberately knows nothing
about conformal factors or radial reductions, so it can serve as an
independent check of :mod:`soliton_lab.geometry`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionMismatchError, SingularMetricError, SolitonLabError, StencilError

DEFAULT_STEP = 1e-4
# scalar curvature extrapolates K(h/2) and K(h); the h^4 error term cancels,
# so a larger step keeps the roundoff floor (~eps / h^2) low
EXTRAPOLATION_STEP = 2e-3
# fourth-order central first-derivative weights at offsets -2, -1, 1, 2
_OFFSETS = (-2, -1, 1, 2)
_WEIGHTS = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)


@dataclass(frozen=True)
class MetricField:
    """Metric components ``x -> g_ij(x)`` on an open region of ``R^dim``.

    ``singular_distance`` (optional) returns an estimate of the Euclidean
    distance from ``x`` to the singular set; stencils closer than ten steps
    are rejected.
    """

    dim: int
    components: Callable[[np.ndarray], np.ndarray]
    singular_distance: Optional[Callable[[np.ndarray], float]] = None
    det_floor: float = 1e-300
    name: str = "metric"

    def __call__(self, x: np.ndarray) -> np.ndarray:
        try:
            g = np.asarray(self.components(x), dtype=float)
        except SolitonLabError as exc:
            raise StencilError(f"{self.name}: stencil point {x} not admissible: {exc}") from exc
        if g.shape != (self.dim, self.dim):
            raise DimensionMismatchError(f"components returned shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise StencilError(f"{self.name}: non-finite components at {x}")
        return g

    def inverse(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g = self(x)
        det = np.linalg.det(g)
        if not abs(det) > self.det_floor:
            raise SingularMetricError(f"{self.name}: |det g| = {abs(det):.3e} at {x}")
        return g, np.linalg.inv(g)


def conformally_flat_metric(
    eps: Sequence[int],
    factor: Callable[[float], float],
    singular_r: Sequence[float] = (),
    name: str = "conformal",
) -> MetricField:
    """``diag(eps) / factor(r)**2`` with ``r = sum eps_i x_i**2``.

    ``factor`` is any scalar function of ``r``; only its values are used.
    """
    eps_arr = np.asarray(eps, dtype=float)
    n = eps_arr.size
    sing = tuple(float(s) for s in singular_r)

    def components(x: np.ndarray) -> np.ndarray:
        r = float(np.dot(eps_arr, x * x))
        f = factor(r)
        return np.diag(eps_arr) / (f * f)

    def distance(x: np.ndarray) -> float:
        norm = float(np.linalg.norm(x))
        r = float(np.dot(eps_arr, x * x))
        # first-order distance to each level set {r = r_s}; |grad r| = 2|x|
        level = [abs(r - s) / (2.0 * norm) for s in sing] if norm > 0 else []
        return min([norm] + level)

    return MetricField(n, components, distance, name=name)


def _steps(p: np.ndarray, step: float) -> np.ndarray:
    return np.maximum(np.abs(p), 1.0) * step


def _check(m: MetricField, p: Sequence[float], step: float) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(p, dtype=float)
    if x.shape != (m.dim,):
        raise DimensionMismatchError(f"point has shape {x.shape}, metric has dim {m.dim}")
    if not step > 0:
        raise ValueError("step must be positive")
    h = _steps(x, step)
    if m.singular_distance is not None:
        # nested stencils reach 4 steps out; require 10
        if m.singular_distance(x) < 10.0 * float(np.max(h)):
            raise StencilError(f"{m.name}: point {x} within 10 steps of the singular set")
    return x, h


def _partials(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """``out[k, ...] = d f / d x_k`` by fourth-order central differences."""
    slices = []
    for k in range(x.size):
        acc = None
        for off, w in zip(_OFFSETS, _WEIGHTS):
            xs = x.copy()
            xs[k] += off * h[k]
            term = w * f(xs)
            acc = term if acc is None else acc + term
        slices.append(acc / h[k])
    return np.stack(slices)


def _christoffels_at(m: MetricField, x: np.ndarray, h: np.ndarray) -> np.ndarray:
    _, ginv = m.inverse(x)
    dg = _partials(m, x, h)  # dg[l, i, j] = d_l g_ij
    # Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij)
    return 0.5 * np.einsum("kl,lij->kij", ginv, _lower_first_kind(dg))


def _lower_first_kind(dg: np.ndarray) -> np.ndarray:
    """``L[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij`` from ``dg[a, b, c] = d_a g_bc``."""
    d_i_gjl = np.einsum("ijl->lij", dg)
    d_j_gil = np.einsum("jil->lij", dg)
    return d_i_gjl + d_j_gil - dg


def fd_christoffels(m: MetricField, p: Sequence[float], step: float = DEFAULT_STEP) -> np.ndarray:
    """Christoffel symbols ``G[k, i, j]`` by central differences.

    The per-coordinate step is ``max(|x_i|, 1) * step``.
    """
    x, h = _check(m, p, step)
    return _christoffels_at(m, x, h)


def fd_riemann(m: MetricField, p: Sequence[float], step: float = DEFAULT_STEP) -> np.ndarray:
    """Riemann tensor ``R[a, b, c, d] = R^a_{bcd}``.

    ``R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} - G^a_{de} G^e_{cb}``
    """
    x, h = _check(m, p, step)
    gamma = _christoffels_at(m, x, h)
    dgamma = _partials(lambda y: _christoffels_at(m, y, h), x, h)  # [c, a, d, b]
    deriv = np.einsum("cadb->abcd", dgamma)
    quad = np.einsum("ace,edb->abcd", gamma, gamma)
    return deriv - deriv.transpose(0, 1, 3, 2) + quad - quad.transpose(0, 1, 3, 2)


def fd_ricci(m: MetricField, p: Sequence[float], step: float = DEFAULT_STEP) -> np.ndarray:
    """``Ric_bd = R^a_{bad}``."""
    return np.einsum("abad->bd", fd_riemann(m, p, step))


def _scalar_at(m: MetricField, p: Sequence[float], step: float) -> float:
    ric = fd_ricci(m, p, step)
    _, ginv = m.inverse(np.asarray(p, dtype=float))
    return float(np.einsum("bd,bd->", ginv, ric))


def fd_scalar_curvature(
    m: MetricField,
    p: Sequence[float],
    step: float | None = None,
    extrapolate: bool = True,
) -> float:
    """Scalar curvature ``g^{bd} Ric_bd`` by full tensor assembly.

    The central stencils have an error expansion in even powers of the step,
    so by default ``(16 K(h/2) - K(h)) / 15`` is returned with
    ``h = EXTRAPOLATION_STEP``. With ``extrapolate=False`` a single pass at
    ``step`` (default ``DEFAULT_STEP``) is made.
    """
    if not extrapolate:
        return _scalar_at(m, p, DEFAULT_STEP if step is None else step)
    h = EXTRAPOLATION_STEP if step is None else step
    coarse = _scalar_at(m, p, h)
    fine = _scalar_at(m, p, h / 2)
    return (16.0 * fine - coarse) / 15.0


def lowered_riemann(m: MetricField, p: Sequence[float], step: float = DEFAULT_STEP) -> np.ndarray:
    """``R_{abcd} = g_ae R^e_{bcd}``."""
    g = m(np.asarray(p, dtype=float))
    return np.einsum("ae,ebcd->abcd", g, fd_riemann(m, p, step))


def bianchi_defect(m: MetricField, p: Sequence[float], step: float = DEFAULT_STEP) -> float:
    """Largest ``|R_abcd + R_acdb + R_adbc|`` (first Bianchi identity)."""
    R = lowered_riemann(m, p, step)
    cyc = R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2)
    return float(np.max(np.abs(cyc)))


def metric_compatibility_defect(
    m: MetricField, p: Sequence[float], step: float = DEFAULT_STEP
) -> float:
    """Largest ``|nabla_k g_ij|`` with both derivative and connection from differences."""
    x, h = _check(m, p, step)
    g = m(x)
    gamma = _christoffels_at(m, x, h)
    dg = _partials(m, x, h)
    cov = dg - np.einsum("lki,lj->kij", gamma, g) - np.einsum("lkj,il->kij", gamma, g)
    return float(np.max(np.abs(cov)))


def relative_gap(a: float, b: float, abs_floor: float = 1e-6) -> float:
    """``|a-b| / max(|a|, |b|)``, or the absolute gap when both are near zero."""
    scale = max(abs(a), abs(b))
    if scale < abs_floor:
        return abs(a - b) if abs(a - b) > abs_floor else 0.0
    return abs(a - b) / scale


def agree(a: float, b: float, rel: float = 1e-4, abs_tol: float = 1e-6) -> bool:
    """Closed form vs oracle: relative ``rel``, or absolute ``abs_tol`` near zero."""
    return abs(a - b) <= max(rel * max(abs(a), abs(b)), abs_tol) and math.isfinite(a - b)
