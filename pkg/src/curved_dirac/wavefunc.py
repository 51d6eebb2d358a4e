"""Closed-form radial components, normalization constants and overlap integrals.

Upper components:

* hydrogen  G1(r)   = r^(k) e^(-beta r) L_n^(2k-1)(2 beta r), k = Theta + 1
* Morse     F1(rho) = rho^beta e^(-|q| rho) L_n^(2 beta)(2 |q| rho), q = gamma_MT
* linear    G1(y)   = e^(-nu y^2/2) H_N(sqrt(nu) y), N = 2(k + n) - 1/2

The Morse Laguerre argument is 2|q| rho.  Both q rho and 2 q rho were tried
against the finite-difference residual of the decoupled equation; only the
doubled argument with |q| solves it (the sign matters when a cos2eta + b < 0).

Lower components are the first-order map applied analytically.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import fd
from .constants import GRID_POINTS, QUAD_TOL
from .model import CouplingParams, check, decoupled_ode_coeffs, one_minus_eps2
from .radial import RadialFunction
from .specfun import QuadratureError, hermite, integrate, laguerre, pochhammer
from .spectrum import EnergyLevel, oscillator_level, quantization_residual

NORM_AGREEMENT = 1e-4


class ConsistencyError(ValueError):
    """The EnergyLevel does not solve the quantization condition for these params."""


class NormMethod(enum.Enum):
    CLOSED_FORM = "ClosedForm"
    NUMERIC = "Numeric"


@dataclass(frozen=True)
class NormConstant:
    """Normalization constant with the sub-values used to build it.

    ``finding`` is non-empty when the closed form disagrees with the
    numerically determined constant and the numeric value was used instead.
    """

    value: float
    method: NormMethod
    detail: dict = field(default_factory=dict)
    finding: str = ""

    @property
    def flagged(self) -> bool:
        return bool(self.finding)


def _check_level(params: CouplingParams, level: EnergyLevel, potential: str) -> None:
    if level.system.potential != potential:
        raise ConsistencyError(f"level is for {level.system.value}, expected a {potential} level")
    check(params, level.system)
    res = quantization_residual(level.system, params, level.n, level.epsilon, level.k)
    w = one_minus_eps2(params, level.epsilon)
    if abs(res) > 1e-6 * max(1.0, (level.k + level.n) / w):
        raise ConsistencyError(f"level does not solve the quantization condition (residual {res:.3e})")


def _beta_ht(params, eps):
    return math.sqrt(one_minus_eps2(params, eps)) / params.alpha


def _beta_mt(params, eps):
    return math.sqrt(one_minus_eps2(params, eps)) / (params.alpha * params.delta)


# -- sampling -----------------------------------------------------------------

def hydrogen_components(params: CouplingParams, level: EnergyLevel, r):
    r = np.asarray(r, dtype=float)
    th, n = params.theta, level.n
    beta = _beta_ht(params, level.epsilon)
    x = 2 * beta * r
    env = r ** (th + 1) * np.exp(-beta * r)
    lag = laguerre(n, 2 * th + 1, x)
    g1 = env * lag
    pref = params.alpha / (params.c + level.epsilon)
    g2 = pref * env * ((-params.s / params.alpha + (2 * th + 1) / r - beta) * lag
                       - 2 * beta * laguerre(n - 1, 2 * th + 2, x))
    return g1, g2


def morse_components(params: CouplingParams, level: EnergyLevel, rho):
    rho = np.asarray(rho, dtype=float)
    n, d = level.n, params.delta
    beta = _beta_mt(params, level.epsilon)
    q = abs(params.gamma_mt)
    kappa = params.gamma_mt * d
    x = 2 * q * rho
    env = rho ** beta * np.exp(-q * rho)
    lag = laguerre(n, 2 * beta, x)
    f1 = env * lag
    pref = params.alpha / (params.c + level.epsilon)
    f2 = pref * env * ((-params.s / params.alpha - d * beta + (d * q - kappa) * rho) * lag
                       + 2 * d * q * rho * laguerre(n - 1, 2 * beta + 1, x))
    return f1, f2


def linear_components(params: CouplingParams, level: EnergyLevel, r):
    r = np.asarray(r, dtype=float)
    nu = params.nu
    big_n = oscillator_level(level.k, level.n)
    center = decoupled_ode_coeffs(level.system, params, level.epsilon).center
    y = r + center
    x = math.sqrt(nu) * y
    gauss = np.exp(-0.5 * nu * y * y)
    g1 = gauss * hermite(big_n, x)
    pi_coeff = params.s / params.alpha - (params.b + level.epsilon * params.a) / nu
    pref = params.alpha / (params.c + level.epsilon)
    g2 = -pref * gauss * (pi_coeff * hermite(big_n, x) + math.sqrt(nu) * hermite(big_n + 1, x))
    return g1, g2


def _pair(grid, g1, g2, variable, level, names):
    meta = {"system": level.system.value, "n": level.n, "epsilon": level.epsilon, "k": level.k}
    return (RadialFunction(grid, g1, variable, {**meta, "component": names[0]}),
            RadialFunction(grid, g2, variable, {**meta, "component": names[1]}))


def hydrogen_radial(params: CouplingParams, level: EnergyLevel, grid=None):
    _check_level(params, level, "hydrogen")
    grid = default_grid(params, level) if grid is None else np.asarray(grid, dtype=float)
    if np.any(grid <= 0):
        raise ValueError("hydrogen grid must be in r > 0")
    g1, g2 = hydrogen_components(params, level, grid)
    return _pair(grid, g1, g2, "r", level, ("G1", "G2"))


def morse_radial(params: CouplingParams, level: EnergyLevel, grid=None):
    """(F1, F2) sampled on a grid in rho = e^{-delta r}.

    Any positive grid is accepted; rho <= 1 is the half line r >= 0.
    """
    _check_level(params, level, "morse")
    if not abs(level.epsilon) < 1:
        raise ValueError("Morse components need |epsilon| < 1")
    grid = default_grid(params, level) if grid is None else np.asarray(grid, dtype=float)
    if np.any(grid <= 0):
        raise ValueError("Morse grid must be in rho > 0")
    f1, f2 = morse_components(params, level, grid)
    return _pair(grid, f1, f2, "rho", level, ("F1", "F2"))


def linear_radial(params: CouplingParams, level: EnergyLevel, grid=None):
    """(G1, G2) sampled on a grid in r (the oscillator lives on the whole line)."""
    _check_level(params, level, "linear")
    if not params.nu > 0:
        raise ValueError("linear components need nu > 0")
    grid = default_grid(params, level) if grid is None else np.asarray(grid, dtype=float)
    g1, g2 = linear_components(params, level, grid)
    return _pair(grid, g1, g2, "r", level, ("G1", "G2"))


def radial(params: CouplingParams, level: EnergyLevel, grid=None):
    return {"hydrogen": hydrogen_radial, "morse": morse_radial,
            "linear": linear_radial}[level.system.potential](params, level, grid)


def _support(f, lo: float, hi: float, floor: float, geometric: bool, samples: int = 4000):
    """Smallest [x0, x1] inside [lo, hi] outside which |f| < floor * max|f|."""
    x = np.geomspace(lo, hi, samples) if geometric else np.linspace(lo, hi, samples)
    v = np.abs(f(x))
    keep = np.nonzero(v >= floor * v.max())[0]
    i0 = max(keep[0] - 1, 0)
    i1 = min(keep[-1] + 1, samples - 1)
    return x[i0], x[i1]


def default_grid(params: CouplingParams, level: EnergyLevel, points: int = GRID_POINTS,
                 outer_floor: float = 1e-16, rho_max: float | None = None) -> np.ndarray:
    """Grid in the natural variable resolving the closed-form upper component.

    Hydrogen: geometric in r from 1e-6/beta (so the first decade shows the
    r^(Theta+1) power law) to where the tail drops below ``outer_floor``.
    Morse: geometric in rho (uniform in r) over the same decay window, or up
    to ``rho_max`` when given.  Linear: uniform in r around the Gaussian.
    """
    kind = level.system.potential
    if kind == "hydrogen":
        beta = _beta_ht(params, level.epsilon)
        scale = 1.0 / beta
        big = level.n + 1 + params.theta
        _, hi = _support(lambda r: hydrogen_components(params, level, r)[0],
                         1e-3 * scale, (80 + 20 * big) * scale, outer_floor, True)
        return fd.geometric_grid(1e-6 * scale, hi, points)
    if kind == "morse":
        beta = _beta_mt(params, level.epsilon)
        q = abs(params.gamma_mt)
        peak = (beta + 2 * level.n + 1) / q
        # a power law needs no resolution below e^-25 of the peak
        lo = peak * max(1e-12 ** (1 / beta), math.exp(-25))
        _, hi = _support(lambda x: morse_components(params, level, x)[0],
                         lo, peak * 50 + 100 / q, outer_floor, True)
        if rho_max is not None:
            hi = rho_max
        return fd.geometric_grid(lo, hi, points)
    nu = params.nu
    center = decoupled_ode_coeffs(level.system, params, level.epsilon).center
    big_n = oscillator_level(level.k, level.n)
    half = math.sqrt((2 * big_n + 1) / nu) + math.sqrt(2 * 40 / nu) + 1 / math.sqrt(nu)
    lo, hi = _support(lambda r: linear_components(params, level, r)[0],
                      -center - half, -center + half, outer_floor, False)
    return fd.uniform_grid(lo, hi, points)


# -- normalization ------------------------------------------------------------

def _half_line(f, scale: float, tol: float, power: float, absolute: bool = False) -> float:
    """Integral of f over (0, inf) for f ~ r^power (power > -1) near 0.

    On (0, scale] the map u = r^(power+1) absorbs the power law, leaving a
    bounded integrand even when power is close to -1.  ``tol`` is relative
    unless ``absolute`` is set.
    """
    p1 = power + 1
    tols = {"tol": tol, "rel_tol": 0.0} if absolute else {"tol": 0.0, "rel_tol": tol}

    def head(u):
        # tiny u underflows r; the integrand has reached its r -> 0 limit there
        r = np.maximum(np.exp(np.log(u) / p1), 1e-280)
        return f(r) * r ** (1 - p1) / p1

    near = integrate(head, 0.0, scale ** p1, **tols)
    tail = integrate(f, scale, math.inf, scale=20 * scale, **tols)
    return near + tail


def hydrogen_norm_integral(params: CouplingParams, level: EnergyLevel, tol: float = QUAD_TOL) -> float:
    """Integral of (G1^2 + G2^2)(1 + alpha^2 b/r) over r > 0 for the unnormalized pair.

    ``tol`` is a relative accuracy.
    """
    th = params.theta
    if params.b != 0 and not th > 0:
        raise ArithmeticError("the 1/r measure makes the norm diverge at r=0 for Theta <= 0 and b != 0")

    def f(r):
        g1, g2 = hydrogen_components(params, level, r)
        return (g1 * g1 + g2 * g2) * (1 + params.alpha ** 2 * params.b / r)

    beta = _beta_ht(params, level.epsilon)
    # G2^2 ~ r^(2 Theta) near 0, and the measure adds 1/r when b != 0
    power = 2 * th - (1 if params.b != 0 else 0)
    return _half_line(f, 1.0 / beta, tol, power)


def hydrogen_overlap(params: CouplingParams, m: EnergyLevel, n: EnergyLevel,
                     curved: bool = False, tol: float = 1e-12) -> float:
    """Overlap of two normalized hydrogen spinors (G1 G1' + G2 G2').

    ``curved`` weights it with 1 + alpha^2 b/r, the measure of the
    normalization integral; otherwise the measure is plain dr.  Distinct
    levels are orthogonal in dr only.
    """
    nm, nn = norm_constant(params, m).value, norm_constant(params, n).value

    def f(r):
        a1, a2 = hydrogen_components(params, m, r)
        b1, b2 = hydrogen_components(params, n, r)
        w = 1 + params.alpha ** 2 * params.b / r if curved else 1.0
        return nm * nn * (a1 * b1 + a2 * b2) * w

    beta = min(_beta_ht(params, m.epsilon), _beta_ht(params, n.epsilon))
    power = 2 * params.theta - (1 if curved and params.b != 0 else 0)
    return _half_line(f, 1.0 / beta, tol, power, absolute=True)


def hydrogen_norm_closed_form(params: CouplingParams, level: EnergyLevel) -> tuple[float, dict]:
    """(N, sub-values) from the W1/W2 closed form, read with gamma = Theta and angle eta."""
    g, n = params.theta, level.n
    beta = _beta_ht(params, level.epsilon)
    s, al, b = params.s, params.alpha, params.b
    fact = math.factorial(n)
    w1 = (pochhammer(2 * g + 2, n) / fact * (1 + (s / (al * beta) - (2 * g + 1) / 2) ** 2)
          + 4 * beta ** 2 * pochhammer(2 * g + 3, n) / ((2 * g + 1) * fact))
    w2 = (pochhammer(2 * g + 1, n) / fact
          * (2 + (2 * g + 1) ** 2 / 2 * (1 - s / (al * beta * (2 * g + 1))) ** 2)
          + 4 * beta ** 2 * pochhammer(2 * g + 2, n) / ((2 * g + 1) * fact))
    radicand = w1 + al ** 2 * b * beta * w2
    detail = {"W1": w1, "W2": w2, "radicand": radicand}
    if not radicand > 0:
        raise ArithmeticError(f"closed-form normalization radicand is {radicand:.6g} <= 0")
    return (2 * beta) ** (g + 0.5) / math.sqrt(radicand), detail


def _reconcile(closed, detail, closed_error, integral, label) -> NormConstant:
    numeric = 1.0 / math.sqrt(integral)
    detail = {**detail, "integral": integral, "numeric": numeric}
    if closed is None:
        return NormConstant(numeric, NormMethod.NUMERIC, detail,
                            f"{label} closed form unusable ({closed_error}); numeric constant used")
    check_value = closed ** 2 * integral
    detail["closed_form"] = closed
    detail["closed_form_integral"] = check_value
    discrepancy = check_value - 1.0
    detail["discrepancy"] = discrepancy
    if abs(discrepancy) <= NORM_AGREEMENT:
        return NormConstant(closed, NormMethod.CLOSED_FORM, detail)
    return NormConstant(numeric, NormMethod.NUMERIC, detail,
                        f"{label} closed form gives normalization integral {check_value:.10g} "
                        f"(off by {discrepancy:.3e}); numeric constant used")


def hydrogen_norm_constant(params: CouplingParams, level: EnergyLevel) -> NormConstant:
    _check_level(params, level, "hydrogen")
    integral = hydrogen_norm_integral(params, level)
    try:
        closed, detail = hydrogen_norm_closed_form(params, level)
        err = ""
    except (ArithmeticError, ValueError) as exc:
        closed, detail, err = None, {}, str(exc)
    return _reconcile(closed, detail, err, integral, "hydrogen")


def morse_norm_integral(params: CouplingParams, level: EnergyLevel, tol: float = QUAD_TOL) -> float:
    """Integral over rho in (0, 1] of (F1^2 + F2^2)(1 + alpha^2 b rho)/(delta rho).

    With rho = e^{-t} the measure d rho/rho becomes dt on (0, inf).  ``tol`` is
    a relative accuracy.
    """
    def f(t):
        rho = np.exp(-t)
        f1, f2 = morse_components(params, level, rho)
        return (f1 * f1 + f2 * f2) * (1 + params.alpha ** 2 * params.b * rho) / params.delta

    beta = _beta_mt(params, level.epsilon)
    return integrate(f, 0.0, math.inf, tol=0.0, rel_tol=tol, scale=max(1.0, 1.0 / beta))


def morse_overlap_integral(m: int, n: int, alpha_exp: float, beta_idx: float, gamma_idx: float,
                           lambda_pow: float, mu_scale: float, tol: float = QUAD_TOL) -> float:
    """I = int_0^1 rho^(alpha-1) (-ln rho)^lambda e^(-mu rho) L_m^beta(mu rho) L_n^gamma(mu rho) d rho.

    With rho = e^{-t} this is int_0^inf t^lambda e^{-alpha t} (...) dt.  On
    [0, 1] the substitution t = u^(1/(lambda+1)) removes the t^lambda endpoint
    singularity.
    """
    if not alpha_exp > 0:
        raise ValueError("overlap integral diverges at rho=0 unless alpha_exp > 0")
    if not lambda_pow > -1:
        raise ValueError("overlap integral diverges at rho=1 unless lambda_pow > -1")
    if m < 0 or n < 0:
        return 0.0

    def g(t):
        x = mu_scale * np.exp(-t)
        return (np.exp(-alpha_exp * t - x) * laguerre(m, beta_idx, x) * laguerre(n, gamma_idx, x))

    p = 1.0 / (lambda_pow + 1)
    head = integrate(lambda u: g(u ** p) * p, 0.0, 1.0, tol=0.5 * tol)
    tail = integrate(lambda t: t ** lambda_pow * g(t), 1.0, math.inf, tol=0.5 * tol,
                     scale=max(1.0, 10.0 / alpha_exp))
    return head + tail


def morse_norm_closed_form(params: CouplingParams, level: EnergyLevel) -> tuple[float, dict]:
    """(N, sub-values) from the K1..K3 / I_{m,n} closed form.

    Read with nu = beta_MT, integral scale mu = gamma_MT and
    lambda = alpha/delta - 1.
    """
    al, d, a, b = params.alpha, params.delta, params.a, params.b
    nu = _beta_mt(params, level.epsilon)
    mu = params.gamma_mt
    lam = al / d - 1
    ce = params.c + level.epsilon
    n = level.n
    k1 = 1 + 4 * al ** 2 * a ** 2 / (d ** 2 * mu ** 2)
    k2 = -4 * al ** 2 * a / (mu * ce)
    k3 = al ** 2 * d ** 2 / ce ** 2

    def pair(mm, nn):
        i1 = morse_overlap_integral(mm, nn, 2 * nu, 2 * nu, 2 * nu, lam, mu)
        i2 = morse_overlap_integral(mm, nn, 2 * nu - 1, 2 * nu, 2 * nu, lam, mu)
        return i1 + al ** 2 * b * i2

    terms = (k1 * pair(n, n), -k2 * (n + 2 * nu) * pair(n, n - 1),
             k3 * (n + 2 * nu) ** 2 * pair(n - 1, n - 1))
    total = math.fsum(terms)
    detail = {"K1": k1, "K2": k2, "K3": k3, "I_terms": list(terms), "bracket": total}
    if not total > 0:
        raise ArithmeticError(f"closed-form normalization bracket is {total:.6g} <= 0")
    return total ** -0.5, detail


def morse_norm_constant(params: CouplingParams, level: EnergyLevel) -> NormConstant:
    _check_level(params, level, "morse")
    integral = morse_norm_integral(params, level)
    try:
        closed, detail = morse_norm_closed_form(params, level)
        err = ""
    except (ArithmeticError, ValueError, QuadratureError) as exc:
        closed, detail, err = None, {}, str(exc)
    return _reconcile(closed, detail, err, integral, "Morse")


def norm_constant(params: CouplingParams, level: EnergyLevel) -> NormConstant:
    kind = level.system.potential
    if kind == "hydrogen":
        return hydrogen_norm_constant(params, level)
    if kind == "morse":
        return morse_norm_constant(params, level)
    raise ValueError("no normalization closed form for the linear system")


def sampled_norm(g1: RadialFunction, g2: RadialFunction, params: CouplingParams) -> float:
    """Integral of (G1^2 + G2^2) times the curved-volume factor over the sampled grid.

    Hydrogen and the linear system integrate in r with 1 + alpha^2 U(r); Morse
    integrates in rho with (1 + alpha^2 b rho)/(delta rho).
    """
    dens = g1.values ** 2 + g2.values ** 2
    x = g1.grid
    system = g1.meta.get("system", "")
    if g1.variable == "rho":
        w = (1 + params.alpha ** 2 * params.b * x) / (params.delta * x)
    elif system.startswith("Hydrogen"):
        w = 1 + params.alpha ** 2 * params.b / x
    else:
        w = 1 + params.alpha ** 2 * params.b * x
    return fd.integrate_samples(x, dens * w)
