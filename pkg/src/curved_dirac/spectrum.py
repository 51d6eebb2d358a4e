"""Closed-form spectra, Bargmann indices and quantization residuals.

Each quantization condition sets the compact-generator eigenvalue equal to
k + n.  The closed forms below are the roots of those conditions; squaring
in the hydrogen and Morse derivations introduces a spurious root, so every
candidate is screened against the unsquared residual before it is returned.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable

from scipy import optimize

from .constants import RESIDUAL_TOL
from .model import CouplingParams, SystemKind, check, one_minus_eps2

LINEAR_K = (0.25, 0.75)


class NoBoundStateError(ArithmeticError):
    def __init__(self, message: str, n_max: int | None = None):
        super().__init__(message)
        self.n_max = n_max


class RepresentationError(ArithmeticError):
    """k + n is not a positive discrete-series label."""


class BracketError(ValueError):
    pass


class Branch(enum.Enum):
    PLUS = "Plus"
    MINUS = "Minus"


@dataclass(frozen=True)
class EnergyLevel:
    system: SystemKind
    n: int
    epsilon: float
    k: float
    branch: Branch
    shape: dict = field(default_factory=dict)

    @property
    def nodes(self) -> int:
        """Interior zeros of the upper component."""
        if self.system.potential == "linear":
            return oscillator_level(self.k, self.n)
        return self.n


def oscillator_level(k: float, n: int) -> int:
    """Oscillator quantum number reached by the (k, n) state, 2(k + n) - 1/2."""
    return int(round(2 * (k + n) - 0.5))


def _beta(params: CouplingParams, eps: float) -> float:
    w = one_minus_eps2(params, eps)
    if w <= 0:
        raise ValueError(f"|epsilon| must be < {params.mu} for a bound state")
    return math.sqrt(w) / params.alpha


def bargmann_index(system: SystemKind, params: CouplingParams, epsilon: float | None = None,
                   k_linear: float = 0.25) -> float:
    kind = system.potential
    if kind == "hydrogen":
        return params.theta + 1
    if kind == "morse":
        if epsilon is None:
            raise ValueError("Morse Bargmann index depends on epsilon")
        if abs(epsilon) >= 1:
            raise ValueError("Morse Bargmann index needs |epsilon| < 1")
        return 0.5 + math.sqrt(one_minus_eps2(params, epsilon)) / (params.alpha * params.delta)
    if k_linear not in LINEAR_K:
        raise ValueError("linear Bargmann index must be 1/4 or 3/4")
    return k_linear


def quantization_lhs(system: SystemKind, params: CouplingParams, epsilon: float) -> float:
    """Eigenvalue of the compact generator implied by epsilon."""
    al, s, c = params.alpha, params.s, params.c
    if system is SystemKind.HYDROGEN_TILTING:
        return -(params.b + epsilon * params.Z) / _beta(params, epsilon)
    if system is SystemKind.HYDROGEN_FACTORIZATION:
        # R0 = -F with the factorization constants A = C = +beta, F = (b + eps Z)/A
        big_a = _beta(params, epsilon)
        big_f = (params.b + epsilon * params.Z) / big_a
        return -big_f
    if system is SystemKind.MORSE_TILTING:
        d = params.delta
        g = params.a * c + params.b
        num = al * g / (d * s) + 2 * (epsilon * params.a - params.b) / d ** 2
        den = 2 * math.sqrt(al ** 2 * g ** 2 / (s ** 2 * d ** 2))
        return num / den
    if system is SystemKind.MORSE_FACTORIZATION:
        d = params.delta
        big_a = abs(params.gamma_mt)
        return (al * d / s * (params.a * c + params.b) + 2 * (epsilon * params.a - params.b)) / (2 * big_a * d ** 2)
    nu = params.nu
    w = one_minus_eps2(params, epsilon)
    return ((params.b + epsilon * params.a) ** 2 / nu ** 2 - nu - w / al ** 2) / (4 * nu)


def quantization_residual(system: SystemKind, params: CouplingParams, n: int, epsilon: float,
                          k_linear: float = 0.25) -> float:
    """LHS - (k + n) of the system's quantization condition."""
    k = bargmann_index(system, params, epsilon, k_linear)
    return quantization_lhs(system, params, epsilon) - (k + n)


def solve_quantization(system: SystemKind, params: CouplingParams, n: int,
                       bracket: tuple[float, float], k_linear: float = 0.25) -> float:
    lo, hi = bracket
    if not lo < hi:
        raise BracketError(f"degenerate or reversed bracket {bracket}")

    def f(e):
        return quantization_residual(system, params, n, e, k_linear)

    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"residual does not change sign on {bracket}")
    return optimize.brentq(f, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)


def _quadratic_roots(qa: float, qb: float, qc: float, alternate: bool) -> tuple[float, float] | None:
    """Roots (plus, minus) of qa x^2 + qb x + qc, or None for a negative discriminant.

    ``alternate`` evaluates them as 2 qc/(-qb -+ sqrt(disc)), the
    rationalised form, instead of the textbook one.
    """
    disc = qb * qb - 4 * qa * qc
    if disc < 0:
        return None
    root = math.sqrt(disc)
    if not alternate:
        return (-qb + root) / (2 * qa), (-qb - root) / (2 * qa)
    dp, dm = -qb - root, -qb + root
    plus = 2 * qc / dp if dp != 0 else (-qb + root) / (2 * qa)
    minus = 2 * qc / dm if dm != 0 else (-qb - root) / (2 * qa)
    return plus, minus


def _polish(f, eps: float, ulps: int = 8) -> float:
    """Double within ``ulps`` steps of eps minimizing |f|.

    Near |eps| -> 1 one ulp of eps moves the residual by ~1e-10, so the
    rounding in the closed form alone can exceed the residual budget.
    """
    best, fbest = eps, abs(f(eps))
    for direction in (-math.inf, math.inf):
        x = eps
        for _ in range(ulps):
            x = math.nextafter(x, direction)
            try:
                fx = abs(f(x))
            except ValueError:
                break
            if fx < fbest:
                best, fbest = x, fx
    return best


def _screen(system, params, n, candidates, k_linear=0.25, shape_fn=None) -> list[EnergyLevel]:
    out = []
    for branch, eps in candidates:
        if not abs(eps) < params.mu:
            continue
        eps = _polish(lambda e: quantization_residual(system, params, n, e, k_linear), eps)
        if not abs(eps) < params.mu:
            continue
        k = bargmann_index(system, params, eps, k_linear)
        res = quantization_residual(system, params, n, eps, k_linear)
        scale = max(1.0, abs(k + n))
        if abs(res) <= 1e-6 * scale:
            shape = shape_fn(eps) if shape_fn else {}
            out.append(EnergyLevel(system, n, eps, k, branch, shape))
    return out


def _hydrogen_shape(params):
    def shape(eps):
        return {"gamma_HT": params.theta, "beta_HT": _beta(params, eps)}
    return shape


def hydrogen_levels(params: CouplingParams, n: int,
                    system: SystemKind = SystemKind.HYDROGEN_TILTING) -> list[EnergyLevel]:
    check(params, system)
    if n < 0:
        raise ValueError("n must be >= 0")
    big_n = n + 1 + params.theta
    if big_n <= 0:
        raise RepresentationError(f"k + n = {big_n} <= 0")
    al, Z, b, mu = params.alpha, params.Z, params.b, params.mu
    # (alpha^2 Z^2 + N^2) eps^2 + 2 alpha^2 b Z eps + alpha^2 b^2 - N^2 mu^2 = 0
    qa = al ** 2 * Z ** 2 + big_n ** 2
    qb = 2 * al ** 2 * b * Z
    qc = al ** 2 * b ** 2 - big_n ** 2 * mu ** 2
    if system is SystemKind.HYDROGEN_TILTING:
        radicand = mu ** 2 * qa - al ** 2 * b ** 2
        if radicand < 0:
            return []
        root = big_n * math.sqrt(radicand)
        roots = ((-al ** 2 * b * Z + root) / qa, (-al ** 2 * b * Z - root) / qa)
    else:
        roots = _quadratic_roots(qa, qb, qc, alternate=True)
        if roots is None:
            return []
    cands = [(Branch.PLUS, roots[0]), (Branch.MINUS, roots[1])]
    return _screen(system, params, n, cands, shape_fn=_hydrogen_shape(params))


def energy_hydrogen(params: CouplingParams, n: int,
                    system: SystemKind = SystemKind.HYDROGEN_TILTING) -> EnergyLevel:
    levels = hydrogen_levels(params, n, system)
    if not levels:
        raise NoBoundStateError(f"no bound state for hydrogen n={n}")
    level = levels[0]
    for kind in (SystemKind.HYDROGEN_TILTING, SystemKind.HYDROGEN_FACTORIZATION):
        res = quantization_residual(kind, params, n, level.epsilon)
        if abs(res) > _tolerance(params, level):
            raise ArithmeticError(f"{kind.value} condition violated at closed form: {res:.3e}")
    return level


def _tolerance(params: CouplingParams, level: EnergyLevel) -> float:
    # the residual cannot beat the rounding of epsilon amplified by d(lhs)/d(eps)
    w = one_minus_eps2(params, level.epsilon)
    amplification = (level.k + level.n) / w
    return max(RESIDUAL_TOL, 64 * 2.2e-16 * amplification)


def _morse_shape(params):
    def shape(eps):
        return {"beta_MT": math.sqrt(one_minus_eps2(params, eps)) / (params.alpha * params.delta),
                "gamma_MT": params.gamma_mt,
                "Gamma": params.s / (params.a * params.c + params.b)}
    return shape


def _morse_coeffs(params: CouplingParams, n: int):
    """Quadratic (G^2 a^2 + 1) eps^2 - 2 G a X eps + X^2 - 1 = 0.

    G = |Gamma| and X = G b + m alpha delta with m = n for gamma_MT > 0 and
    m = n + 1 otherwise; for gamma_MT > 0 the roots are the usual two-branch
    Morse formula.
    """
    g = abs(params.s / (params.a * params.c + params.b))
    m = n if params.gamma_mt > 0 else n + 1
    x = g * params.b + m * params.alpha * params.delta
    qa = g ** 2 * params.a ** 2 + 1
    disc = g ** 2 * params.a ** 2 - x ** 2 + 1
    return g, x, qa, disc


def morse_discriminant(params: CouplingParams, n: int) -> float:
    return _morse_coeffs(params, n)[3]


def morse_levels(params: CouplingParams, n: int,
                 system: SystemKind = SystemKind.MORSE_TILTING) -> list[EnergyLevel]:
    check(params, system)
    if n < 0:
        raise ValueError("n must be >= 0")
    g, x, qa, disc = _morse_coeffs(params, n)
    if disc < 0:
        return []
    a = params.a
    if system is SystemKind.MORSE_TILTING:
        root = math.sqrt(disc)
        roots = ((2 * g * a * x + 2 * root) / (2 * qa), (2 * g * a * x - 2 * root) / (2 * qa))
    else:
        roots = _quadratic_roots(qa, -2 * g * a * x, x * x - 1, alternate=True)
    cands = [(Branch.PLUS, roots[0]), (Branch.MINUS, roots[1])]
    return _screen(system, params, n, cands, shape_fn=_morse_shape(params))


def morse_n_max(params: CouplingParams, limit: int = 100000) -> int:
    """Largest n with a non-negative discriminant and a valid |eps| < 1 root (-1 if none)."""
    best = -1
    for n in range(limit):
        if morse_discriminant(params, n) < 0:
            break
        if morse_levels(params, n):
            best = n
    return best


def energy_morse(params: CouplingParams, n: int, branch: Branch = Branch.PLUS,
                 system: SystemKind = SystemKind.MORSE_TILTING) -> EnergyLevel:
    if isinstance(branch, str):
        branch = Branch(branch)
    if morse_discriminant(params, n) < 0:
        n_max = morse_n_max(params)
        raise NoBoundStateError(f"no Morse bound state for n={n} (n_max={n_max})", n_max)
    levels = {lv.branch: lv for lv in morse_levels(params, n, system)}
    if branch not in levels:
        raise NoBoundStateError(
            f"Morse branch {branch.value} at n={n} does not satisfy the quantization condition",
            morse_n_max(params))
    level = levels[branch]
    other = (SystemKind.MORSE_FACTORIZATION if system is SystemKind.MORSE_TILTING
             else SystemKind.MORSE_TILTING)
    res = quantization_residual(other, params, n, level.epsilon)
    if abs(res) > _tolerance(params, level):
        raise ArithmeticError(f"{other.value} condition violated at closed form: {res:.3e}")
    return level


def _linear_shape(params):
    def shape(eps):
        nu = params.nu
        drive = params.b + eps * params.a
        return {"nu": nu,
                "pi_coeff": params.s / params.alpha - drive / nu,
                "V_shift": drive ** 2 / nu ** 2 - nu}
    return shape


def linear_levels(params: CouplingParams, n: int, k_linear: float = 0.25) -> list[EnergyLevel]:
    system = SystemKind.LINEAR_FACTORIZATION
    check(params, system)
    if n < 0:
        raise ValueError("n must be >= 0")
    al, a, b, nu = params.alpha, params.a, params.b, params.nu
    w = 1 + 4 * (k_linear + n)
    radicand = nu ** 2 * (2 * al ** 2 * nu * (w / 2) * (al ** 2 * a ** 2 + nu ** 2)
                          + al ** 2 * (a ** 2 - b ** 2) + nu ** 2)
    if radicand < 0:
        return []
    root = math.sqrt(radicand)
    den = al ** 2 * a ** 2 + nu ** 2
    cands = [(Branch.PLUS, (-al ** 2 * a * b + root) / den),
             (Branch.MINUS, (-al ** 2 * a * b - root) / den)]
    out = []
    for branch, eps in cands:
        if abs(eps) < 1:
            k = k_linear
            out.append(EnergyLevel(system, n, eps, k, branch, _linear_shape(params)(eps)))
    return out


def energy_linear(params: CouplingParams, n: int, branch: Branch = Branch.PLUS,
                  k_linear: float = 0.25) -> EnergyLevel:
    if isinstance(branch, str):
        branch = Branch(branch)
    levels = {lv.branch: lv for lv in linear_levels(params, n, k_linear)}
    if branch not in levels:
        raise NoBoundStateError(f"no linear-potential bound state for n={n}, branch {branch.value}")
    level = levels[branch]
    res = quantization_residual(SystemKind.LINEAR_FACTORIZATION, params, n, level.epsilon, k_linear)
    if abs(res) > _tolerance(params, level):
        raise ArithmeticError(f"linear quantization condition violated at closed form: {res:.3e}")
    return level


def energy(system: SystemKind, params: CouplingParams, n: int,
           branch: Branch | None = None, k_linear: float = 0.25) -> EnergyLevel:
    kind = system.potential
    if kind == "hydrogen":
        level = energy_hydrogen(params, n, system)
        if branch is not None and level.branch is not branch:
            raise NoBoundStateError(f"hydrogen n={n} has no {branch.value} branch")
        return level
    if kind == "morse":
        return energy_morse(params, n, branch or Branch.PLUS, system)
    return energy_linear(params, n, branch or Branch.PLUS, k_linear)


def all_levels(system: SystemKind, params: CouplingParams, n_values: Iterable[int],
               k_values: Iterable[float] = (0.25,)) -> list[EnergyLevel]:
    """Every valid (n, branch[, k]) level, skipping n without a bound state."""
    out: list[EnergyLevel] = []
    for n in n_values:
        kind = system.potential
        if kind == "hydrogen":
            out.extend(hydrogen_levels(params, n, system))
        elif kind == "morse":
            out.extend(morse_levels(params, n, system))
        else:
            for k in k_values:
                out.extend(linear_levels(params, n, k))
    return out
