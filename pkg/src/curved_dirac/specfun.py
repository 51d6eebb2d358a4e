"""Special functions and quadrature used by the radial solutions.

Orthogonal polynomials are evaluated by their three-term recurrences in the
degree, which stays finite for the degrees used here (n <= 20 or so) where
explicit factorial sums overflow or cancel.
"""
from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .constants import QUAD_MAX_PANELS, QUAD_TAIL_SCALE, QUAD_TOL


class QuadratureError(ArithmeticError):
    """Adaptive quadrature ran out of panels before meeting the tolerance."""

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class RuleKind(enum.Enum):
    GAUSS_LEGENDRE = "GaussLegendre"
    GAUSS_LAGUERRE = "GaussLaguerre"


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    kind: RuleKind
    alpha: float = 0.0

    def __post_init__(self):
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("quadrature nodes must be strictly increasing")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def gauss_legendre(n: int) -> QuadratureRule:
    x, w = np.polynomial.legendre.leggauss(n)
    return QuadratureRule(x, w, RuleKind.GAUSS_LEGENDRE)


def gauss_laguerre(n: int, alpha: float = 0.0) -> QuadratureRule:
    """Rule for the weight x**alpha * exp(-x) on [0, inf)."""
    x, w = special.roots_genlaguerre(n, alpha)
    return QuadratureRule(np.asarray(x), np.asarray(w), RuleKind.GAUSS_LAGUERRE, alpha)


def gamma_fn(x: float) -> float:
    if not x > 0:
        raise ValueError(f"gamma_fn requires x > 0, got {x!r}")
    return math.gamma(x)


def pochhammer(x: float, n: int) -> float:
    """Rising factorial (x)_n as a finite product; (x)_0 = 1."""
    if n < 0:
        raise ValueError("pochhammer needs n >= 0")
    out = 1.0
    for j in range(n):
        out *= x + j
    return out


def laguerre(n: int, alpha: float, x):
    """Associated Laguerre polynomial L_n^alpha(x).

    ``n = -1`` returns zeros, the empty-sum convention used by the lower
    spinor components when n = 0.
    """
    x = np.asarray(x, dtype=float)
    if n < -1:
        raise ValueError("laguerre degree must be >= -1")
    if n == -1:
        return np.zeros_like(x)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    for k in range(n):
        nxt = ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
        prev, cur = cur, nxt
    return cur if cur.ndim else float(cur)


def hermite(n: int, x):
    """Physicists' Hermite polynomial H_n(x)."""
    x = np.asarray(x, dtype=float)
    if n < 0:
        raise ValueError("hermite degree must be >= 0")
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    for k in range(n):
        prev, cur = cur, 2 * x * cur - 2 * k * prev
    return cur if cur.ndim else float(cur)


# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(f, a: float, b: float) -> tuple[float, float]:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fx = np.asarray(f(mid + half * _NODES), dtype=float)
    if not np.all(np.isfinite(fx)):
        raise FloatingPointError(f"integrand not finite on [{a}, {b}]")
    kron = half * float(np.dot(_KWEIGHTS, fx))
    gauss = half * float(np.dot(_GWEIGHTS, fx))
    return kron, abs(kron - gauss)


def _adaptive(f, a: float, b: float, tol: float, max_panels: int, rel_tol: float = 0.0) -> float:
    val, err = _gk15(f, a, b)
    heap = [(-err, a, b, val)]
    total, total_err = val, err
    panels = 1
    while total_err > max(tol, rel_tol * abs(total)):
        if panels >= max_panels:
            raise QuadratureError(
                f"no convergence within {max_panels} panels "
                f"(error estimate {total_err:.3e} > {tol:.3e})", total, total_err)
        neg_err, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        total += v1 + v2 - v
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        panels += 1
    # re-sum to shed accumulated rounding from the running updates
    return math.fsum(item[3] for item in heap)


def integrate(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
              tol: float = QUAD_TOL, max_panels: int = QUAD_MAX_PANELS,
              scale: float = QUAD_TAIL_SCALE, rel_tol: float = 0.0) -> float:
    """Adaptive Gauss-Kronrod integral of a vectorised ``f`` over [a, b].

    An infinite upper limit is split at ``a + scale``; the tail is mapped to
    (0, 1] with x = a + scale - ln(u).  Integrable power-law or logarithmic
    endpoint singularities are handled by bisection toward the endpoint.
    Each piece stops once its error estimate is below ``tol`` or below
    ``rel_tol`` times its own magnitude.
    """
    if math.isinf(a):
        raise ValueError("lower limit must be finite")
    if b == a:
        return 0.0
    if not math.isinf(b):
        return _adaptive(f, a, b, tol, max_panels, rel_tol)
    if b < 0:
        raise ValueError("upper limit -inf is not supported")
    cut = a + scale

    def tail(u):
        return f(cut - np.log(u)) / u

    head = _adaptive(f, a, cut, 0.5 * tol, max_panels, rel_tol)
    return head + _adaptive(tail, 0.0, 1.0, 0.5 * tol, max_panels, rel_tol)
