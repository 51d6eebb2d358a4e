"""Closed-form-free ground truth: ODE residuals and a shooting bound-state finder.

The shooting finder integrates the decoupled second-order equation in the
physical radius r.  A normalized Wronskian of the inward and outward
solutions at the matching point serves as the defect; unlike a log-derivative
mismatch it is bounded and has no poles, so every sign change on the energy
scan is a genuine eigenvalue crossing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as sp_integrate
from scipy import optimize

from . import fd
from .constants import (BOUNDARY_TRIM, ROOT_EPS_TOL, SCAN_GRID_POINTS, SCAN_POINTS,
                        SHOOT_RESCALE, SHOOT_RTOL)
from .model import CouplingParams, SystemKind, check, decoupled_ode_coeffs, one_minus_eps2, radial_q
from .radial import RadialFunction


@dataclass(frozen=True)
class ShootResult:
    epsilon: float
    defect: float
    n_nodes: int = -1
    converged: bool = False


def ode_residual(system: SystemKind, params: CouplingParams, epsilon: float,
                 fn: RadialFunction, trim: int = BOUNDARY_TRIM) -> float:
    """max |G'' + Q G| / max |G| over the trimmed interior.

    Hydrogen and linear functions are checked in r.  Morse functions sampled
    in rho are checked in the Laurent form for sqrt(rho) F1.  On geometric
    grids the residual is taken in the log coordinate t = ln x, i.e. as
    x^2 (G'' + Q G), which keeps power-law endpoints well scaled.
    """
    v = fn.values
    peak = np.max(np.abs(v))
    if peak == 0:
        return 0.0
    x = fn.grid
    coeffs = decoupled_ode_coeffs(system, params, epsilon)
    if fn.variable == "rho":
        u = np.sqrt(x) * v
        q = coeffs.q(x)
        peak = np.max(np.abs(u))
    elif fn.variable == "y":
        u = v
        q = coeffs.q(x)
    else:
        u = v
        q = radial_q(system, params, epsilon, x)
    _, d2 = fd.derivative_matrices(x)
    res = d2 @ u + q * u
    if fd.classify(x) is fd.Spacing.GEOMETRIC:
        res = res * x * x
    inner = slice(trim, len(x) - trim)
    return float(np.max(np.abs(res[inner])) / peak)


# -- shooting -------------------------------------------------------------------
#
# Hydrogen (in r) and Morse (in rho, for u = sqrt(rho) G1) share the Laurent
# form u'' + (A/x + B/x^2 + C) u = 0 with B = -k(k - 1).  Both are integrated
# in t = ln x for w = u / sqrt(x), which obeys w'' + (A x + B + C x^2 - 1/4) w = 0;
# the regular end starts from the series x^k (1 - A x / (2k)) and the outer end
# sits a fixed WKB decay beyond the turning point.  The linear oscillator is
# integrated in r on a window symmetric about its centre.

_TAIL = 45.0
_INNER = 1e-6


def _laurent(system: SystemKind, params: CouplingParams, eps):
    """(A, B, C, k) arrays of the Laurent form for each energy."""
    eps = np.asarray(eps, dtype=float)
    al = params.alpha
    w = (params.mu - eps) * (params.mu + eps)
    if system.potential == "hydrogen":
        th = params.theta
        a = -2 * (params.b + eps * params.Z)
        k = np.full_like(eps, th + 1)
        c = -w / al ** 2
    else:
        d = params.delta
        kap = al * (params.a * params.c + params.b) / params.s
        a = (d * kap + 2 * (eps * params.a - params.b)) / d ** 2
        k = 0.5 + np.sqrt(np.maximum(w, 0.0)) / (al * d)
        c = np.full_like(eps, -(kap / d) ** 2)
    return a, -k * (k - 1), c, k


def _windows(system: SystemKind, params: CouplingParams, eps, n_max: int):
    """Integration interval (lo, hi) in the integration coordinate, per energy."""
    eps = np.asarray(eps, dtype=float)
    tail = _TAIL + 4 * (n_max + 2)
    if system.potential == "linear":
        al, nu = params.alpha, params.nu
        w = (params.mu - eps) * (params.mu + eps)
        drive = params.b + eps * params.a
        shift = drive ** 2 / nu ** 2 - nu - w / al ** 2
        half = np.sqrt(np.maximum(shift, 0.0)) / nu + np.sqrt(2 * tail / nu)
        centre = -drive / nu ** 2
        return centre - half, centre + half
    a, b, c, k = _laurent(system, params, eps)
    decay = np.sqrt(np.maximum(-c, 1e-300))
    disc = np.maximum(a * a - 4 * b * c, 0.0)
    # outer root of C x^2 + A x + B = 0 (C < 0); B - 1/4 <= 0 never binds on its own
    x_turn = np.where(a > 0, (a + np.sqrt(disc)) / (2 * decay ** 2), 0.0)
    # a repulsive A x term adds its own barrier, reaching the tail target by x ~ (tail/2)^2/|A|
    reach = np.where(a < 0, tail * tail / (4 * np.maximum(-a, 1e-300)), np.inf)
    hi = x_turn + np.minimum(tail / decay, reach)
    lo = _INNER * np.minimum(1.0 / decay, k / np.maximum(np.abs(a), 1e-300))
    return np.log(lo), np.log(hi)


def _q_vec(system: SystemKind, params: CouplingParams, eps, x):
    """Q of the integration coordinate, vectorised over matching shapes."""
    if system.potential == "linear":
        return radial_q(system, params, eps, x)
    a, b, c, _ = _laurent(system, params, eps)
    e = np.exp(x)
    return (c * e + a) * e + b - 0.25


def _scalar_q(system: SystemKind, params: CouplingParams, eps: float):
    """Scalar Q of the integration coordinate for the adaptive integrator."""
    if system.potential == "linear":
        al, nu = params.alpha, params.nu
        lin = -2 * (params.b + eps * params.a)
        const = -nu - one_minus_eps2(params, eps) / al ** 2

        def q(r):
            return const + (lin - nu * nu * r) * r
        return q
    a, b, c, _ = (float(v[0]) for v in _laurent(system, params, np.array([eps])))
    b4 = b - 0.25

    def q(t):
        e = math.exp(t)
        return (c * e + a) * e + b4
    return q


def _inner_start(system, params, eps, lo, h):
    """(w0, w1) at the first two nodes of the inner end.

    Laurent systems use the regular series; the oscillator starts from the
    Dirichlet pair (0, tiny).
    """
    if system.potential == "linear":
        return np.zeros_like(lo), np.full_like(lo, 1e-30)
    a, _, _, k = _laurent(system, params, eps)
    c1 = -a / (2 * k)
    x0 = np.exp(lo)
    x1 = np.exp(lo + h)
    ratio = np.exp((k - 0.5) * h) * (1 + c1 * x1) / (1 + c1 * x0)
    return np.full_like(lo, 1e-30), 1e-30 * ratio


def _numerov_scan(system, params, eps, n_max, npts=SCAN_GRID_POINTS):
    """Normalized Wronskian defect and glued node count for an array of energies."""
    eps = np.asarray(eps, dtype=float)
    lo, hi = _windows(system, params, eps, n_max)
    h = (hi - lo) / (npts - 1)
    h2 = h * h / 12.0

    def q_at(j):
        return _q_vec(system, params, eps, lo + j * h)

    # matching index: outermost node where Q > 0, else the middle
    match = np.full(eps.shape, npts // 2)
    for j in range(npts):
        match = np.where(q_at(j) > 0, j, match)
    match = np.clip(match, 2, npts - 3)

    def march(forward: bool):
        if forward:
            u_prev, u_cur = _inner_start(system, params, eps, lo, h)
            first, step, steps = 1, 1, range(2, npts)
        else:
            u_prev, u_cur = np.zeros_like(eps), np.full_like(eps, 1e-30)
            first, step, steps = npts - 2, -1, range(npts - 3, -1, -1)
        f_prev, f_cur = 1 + h2 * q_at(first - step), 1 + h2 * q_at(first)
        nodes = np.zeros(eps.shape, dtype=int)
        triple = np.zeros((3,) + eps.shape)
        for j in steps:
            f_next = 1 + h2 * q_at(j)
            u_next = ((12 - 10 * f_cur) * u_cur - f_prev * u_prev) / f_next
            hit = (j - step) == match
            if np.any(hit):
                triple[0, hit] = u_prev[hit]
                triple[1, hit] = u_cur[hit]
                triple[2, hit] = u_next[hit]
            counting = (j <= match) if forward else (j >= match)
            nodes += (counting & (u_cur * u_next < 0)).astype(int)
            big = np.maximum(np.abs(u_cur), np.abs(u_next))
            scale = np.where(big > 1e100, 1e-100, 1.0)
            u_prev, u_cur = u_cur * scale, u_next * scale
            f_prev, f_cur = f_cur, f_next
        if not forward:
            triple = triple[::-1]
        return triple, nodes

    left, n_left = march(True)
    right, n_right = march(False)
    dl = (left[2] - left[0]) / (2 * h)
    dr = (right[2] - right[0]) / (2 * h)
    wr = left[1] * dr - dl * right[1]
    norm = np.hypot(left[1], dl) * np.hypot(right[1], dr)
    defect = np.divide(wr, norm, out=np.zeros_like(wr), where=norm > 0)
    return defect, n_left + n_right


def _rk_half(q, x0, x1, y0, rtol, samples: int = 2001):
    """Integrate u'' = -q(x) u from x0 to x1 with overflow rescaling.

    Returns the final (u, u') and the number of sign changes of u on
    ``samples`` equally spaced output points.
    """
    def rhs(y, x):
        return (y[1], -q(x) * y[0])

    def advance(y, seg, depth=0):
        with np.errstate(over="ignore", invalid="ignore"):
            sol = sp_integrate.odeint(rhs, y, seg, rtol=rtol, atol=1e-300, mxstep=200000)
        if np.all(np.isfinite(sol)) and np.max(np.abs(sol)) < 1e300:
            g = np.sign(sol[:, 0])
            return sol[-1], int(np.count_nonzero(g[1:] * g[:-1] < 0))
        if depth > 6 or seg.size < 3:
            raise ArithmeticError("shooting integration overflowed")
        # overflow inside the chunk: split it and rescale between pieces
        total = 0
        fine = np.linspace(seg[0], seg[-1], 4 * (seg.size - 1) + 1)
        for k in range(0, fine.size - 1, 8):
            y, cnt = advance(y, fine[k:k + 9], depth + 1)
            y = y / max(abs(y[0]), abs(y[1]))
            total += cnt
        return y, total

    xs = np.linspace(x0, x1, samples)
    y = np.asarray(y0, dtype=float)
    y = y / max(abs(y[0]), abs(y[1]))
    nodes = 0
    chunk = 100
    for start in range(0, samples - 1, chunk):
        y, cnt = advance(y, xs[start:start + chunk + 1])
        nodes += cnt
        mag = max(abs(y[0]), abs(y[1]))
        if mag > SHOOT_RESCALE:
            y = y / mag
    return y, nodes


def _match_coordinate(system, params, eps, lo, hi):
    xs = np.linspace(lo, hi, 4001)
    allowed = np.nonzero(_q_vec(system, params, np.full(xs.shape, eps), xs) > 0)[0]
    if allowed.size == 0:
        return 0.5 * (lo + hi)
    return float(xs[min(max(allowed[-1], 1), xs.size - 2)])


def shoot_defect(system: SystemKind, params: CouplingParams, epsilon: float,
                 n_max: int = 3, rtol: float = SHOOT_RTOL) -> ShootResult:
    """Adaptive inner/outer shooting at one energy.

    The defect is the Wronskian of the two solutions at the matching point
    divided by the norms of their (u, u') vectors, so it lies in [-1, 1].
    """
    check(params, system)
    if not abs(epsilon) < params.mu:
        raise ValueError("shooting needs |epsilon| < mu")
    lo_a, hi_a = _windows(system, params, np.array([epsilon]), n_max)
    lo, hi = float(lo_a[0]), float(hi_a[0])
    q = _scalar_q(system, params, epsilon)
    xm = _match_coordinate(system, params, epsilon, lo, hi)
    if system.potential == "linear":
        inner = (1.0, math.sqrt(max(-q(lo), 1e-300)))
    else:
        a, _, _, k = (float(v[0]) for v in _laurent(system, params, np.array([epsilon])))
        c1 = -a / (2 * k)
        x0 = math.exp(lo)
        # w = x^(k - 1/2) (1 + c1 x), dw/dt = x dw/dx
        inner = (1 + c1 * x0, (k - 0.5) * (1 + c1 * x0) + c1 * x0)
    outer = (1.0, -math.sqrt(max(-q(hi), 1e-300)))
    (gl, dl), nl = _rk_half(q, lo, xm, inner, rtol)
    (gr, dr), nr = _rk_half(q, hi, xm, outer, rtol)
    w = gl * dr - dl * gr
    norm = math.hypot(gl, dl) * math.hypot(gr, dr)
    defect = w / norm if norm > 0 else 0.0
    return ShootResult(float(epsilon), float(defect), nl + nr, bool(abs(defect) < 1e-9))


def energy_mesh(params: CouplingParams, eps_range: tuple[float, float],
                points: int = SCAN_POINTS) -> np.ndarray:
    """Uniform mesh on eps_range plus a log mesh in 1 - |eps| near both ends.

    Weakly bound levels accumulate at |eps| -> mu; the log part resolves them.
    """
    lo, hi = eps_range
    mu = params.mu
    uniform = np.linspace(lo, hi, points)
    gaps = mu * np.geomspace(1e-14, 1.0, points // 2)
    mesh = np.concatenate([uniform, mu - gaps, -mu + gaps])
    mesh = mesh[(mesh >= lo) & (mesh <= hi) & (np.abs(mesh) < mu)]
    return np.unique(mesh)


def find_bound_states(system: SystemKind, params: CouplingParams,
                      eps_range: tuple[float, float] | None = None, n_max: int = 3,
                      points: int = SCAN_POINTS) -> list[ShootResult]:
    """All defect zeros on eps_range whose glued solution has at most n_max nodes.

    Sign changes of a Numerov scan are refined by Brent's method on the
    adaptive Runge-Kutta defect; results are sorted by node count then energy.
    """
    check(params, system)
    mu = params.mu
    if eps_range is None:
        eps_range = (-mu, mu)
    lo, hi = eps_range
    if not lo < hi:
        if lo == hi:
            return []
        raise ValueError("eps_range must be increasing")
    if lo < -mu or hi > mu:
        raise ValueError("eps_range must lie inside (-mu, mu)")
    mesh = energy_mesh(params, (lo, hi), points)
    if mesh.size < 2:
        return []
    defect, nodes = _numerov_scan(system, params, mesh, n_max)
    mesh, defect, nodes = _subdivide(system, params, mesh, defect, nodes, n_max)
    found = []
    flips = np.nonzero(np.sign(defect[1:]) * np.sign(defect[:-1]) < 0)[0]
    for i in flips:
        if min(nodes[i], nodes[i + 1]) > n_max + 1:
            continue
        a, b = mesh[i], mesh[i + 1]
        root = _refine(system, params, a, b, n_max)
        if root is None or root.n_nodes > n_max:
            continue
        if any(r.n_nodes == root.n_nodes and abs(r.epsilon - root.epsilon) < ROOT_EPS_TOL
               for r in found):
            continue
        found.append(root)
    found.sort(key=lambda s: (s.n_nodes, s.epsilon))
    return found


def _subdivide(system, params, mesh, defect, nodes, n_max, rounds: int = 10, split: int = 16):
    """Refine mesh cells whose node counts and defect signs disagree.

    Each eigenvalue adds one node to the glued solution, so a cell whose
    node count jumps by two or more holds several levels and is split until
    they separate.
    """
    for _ in range(rounds):
        dn = np.abs(np.diff(nodes))
        low = np.minimum(nodes[1:], nodes[:-1]) <= n_max + 1
        bad = np.nonzero(low & (dn >= 2))[0]
        if bad.size == 0:
            break
        fresh = np.concatenate([np.linspace(mesh[i], mesh[i + 1], split + 2)[1:-1] for i in bad])
        d_new, n_new = _numerov_scan(system, params, fresh, n_max)
        mesh = np.concatenate([mesh, fresh])
        order = np.argsort(mesh, kind="stable")
        mesh = mesh[order]
        defect = np.concatenate([defect, d_new])[order]
        nodes = np.concatenate([nodes, n_new])[order]
    return mesh, defect, nodes


def _refine(system, params, a, b, n_max) -> ShootResult | None:
    """Brent root of the adaptive defect near the scan bracket [a, b].

    The scan and the adaptive integrator place the root slightly apart, so
    the bracket is widened geometrically until the adaptive defect changes
    sign.
    """
    def f(e):
        return shoot_defect(system, params, e, n_max).defect

    edge = params.mu * (1 - 1e-15)
    width = max(b - a, 1e-12 * max(abs(a), 1e-3))
    lo, hi = a, b
    flo, fhi = f(lo), f(hi)
    for _ in range(4):
        if flo * fhi <= 0:
            break
        lo, hi = max(lo - width, -edge), min(hi + width, edge)
        flo, fhi = f(lo), f(hi)
        width *= 4
    else:
        return None
    if flo == 0 or fhi == 0:
        root = lo if flo == 0 else hi
    else:
        root = optimize.brentq(f, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=200)
    res = shoot_defect(system, params, root, n_max)
    return ShootResult(res.epsilon, res.defect, res.n_nodes, True)
