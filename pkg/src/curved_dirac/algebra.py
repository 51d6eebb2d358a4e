"""Finite-difference realizations of the su(1,1) generator families.

Every family is a triple (J+, J-, J0) of banded matrices on a grid of its
natural variable, obeying [J0, J+-] = +-J+- and [J-, J+] = 2 J0 up to
fourth-order truncation error.

Families and their realizations (D = d/dx, X = -x D^2 + c/x):

``B_HT``  r,   dr/r   B0 = (X + r)/2, B1 = (X - r)/2, B2 = -i r D,
                      c = Theta(Theta+1), k = Theta + 1
``R_HS``  r,   dr/r   R0 = (X + beta^2 r)/(2 beta), R+- = -+r D + beta r - R0
``L_MT``  rho, d rho  L0 = (X' + rho)/2, L1 = (X' - rho)/2, L2 = -i(rho D + 1/2),
                      X' = -rho D^2 - D + beta^2/rho, k = beta + 1/2
``K_MS``  rho, d rho/rho  K0 = (X + q^2 rho)/(2q), K+- = -+rho D + q rho - K0,
                      c = beta^2 - 1/4
``J_LS``  y,   dy     J0 = (-D^2 + nu^2 y^2)/(4 nu), J+- = (nu y -+ D)^2/(4 nu),
                      k = 1/4 or 3/4

The Cartesian families (B, L) carry their anti-Hermitian generator as the real
matrix A = i B2, so B1 +- i B2 = B1 +- A and B2^2 = -A^2.

Tilt convention: (tilt_phi f)(r) = e^{-phi/2} f(e^{-phi} r), so that
tilt (B0 +- B1) tilt^-1 = e^{+-phi} (B0 +- B1).  With phi = ln beta the
hydrogen upper component G1 maps onto a B0 eigenfunction.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.interpolate import CubicSpline

from . import fd
from .constants import BOUNDARY_TRIM
from .model import CouplingParams, SystemKind, check, decoupled_ode_coeffs, one_minus_eps2
from .radial import RadialFunction
from .specfun import hermite, laguerre
from .spectrum import EnergyLevel, bargmann_index, oscillator_level
from .wavefunc import hydrogen_components, linear_components, morse_components

MIN_POINTS_PER_LENGTH = 20


class Family(enum.Enum):
    B_HT = "B_HT"
    L_MT = "L_MT"
    J_LS = "J_LS"
    R_HS = "R_HS"
    K_MS = "K_MS"

    @property
    def system(self) -> SystemKind:
        return _SYSTEM[self]

    @property
    def variable(self) -> str:
        return {"B_HT": "r", "R_HS": "r", "L_MT": "rho", "K_MS": "rho", "J_LS": "y"}[self.value]

    @property
    def cartesian(self) -> bool:
        return self in (Family.B_HT, Family.L_MT)

    @classmethod
    def for_system(cls, system: SystemKind) -> "Family":
        return {v: k for k, v in _SYSTEM.items()}[system]


_SYSTEM = {
    Family.B_HT: SystemKind.HYDROGEN_TILTING,
    Family.R_HS: SystemKind.HYDROGEN_FACTORIZATION,
    Family.L_MT: SystemKind.MORSE_TILTING,
    Family.K_MS: SystemKind.MORSE_FACTORIZATION,
    Family.J_LS: SystemKind.LINEAR_FACTORIZATION,
}


class UnderResolvedGridWarning(UserWarning):
    """The grid has fewer than MIN_POINTS_PER_LENGTH points per decay length."""


@dataclass(frozen=True)
class GridOperator:
    """A banded matrix acting on samples over ``grid``."""

    matrix: sparse.csr_matrix
    grid: np.ndarray
    label: str = ""

    @property
    def bandwidth(self) -> int:
        coo = self.matrix.tocoo()
        return int(np.max(np.abs(coo.row - coo.col))) if coo.nnz else 0

    def __call__(self, f):
        if isinstance(f, RadialFunction):
            if f.grid.shape != self.grid.shape or not np.array_equal(f.grid, self.grid):
                raise ValueError(f"{self.label}: operand grid does not match the operator grid")
            return f.with_values(self.matrix @ f.values)
        values = np.asarray(f, dtype=float)
        if values.shape != self.grid.shape:
            raise ValueError(f"{self.label}: operand length does not match the operator grid")
        return self.matrix @ values

    def _combine(self, other: "GridOperator", sign: float, label: str) -> "GridOperator":
        if not np.array_equal(self.grid, other.grid):
            raise ValueError("operators live on different grids")
        return GridOperator((self.matrix + sign * other.matrix).tocsr(), self.grid, label)

    def __add__(self, other: "GridOperator") -> "GridOperator":
        return self._combine(other, 1.0, f"({self.label}+{other.label})")

    def __sub__(self, other: "GridOperator") -> "GridOperator":
        return self._combine(other, -1.0, f"({self.label}-{other.label})")

    def scaled(self, c: float, label: str | None = None) -> "GridOperator":
        return GridOperator((c * self.matrix).tocsr(), self.grid, label or f"{c:g}*{self.label}")


@dataclass(frozen=True)
class GeneratorTriple:
    """Ladder triple (J+, J-, J0) plus, for Cartesian families, (J0, J1, A)."""

    plus: GridOperator
    minus: GridOperator
    zero: GridOperator
    family: Family
    k: float
    measure: np.ndarray
    cartesian: tuple[GridOperator, GridOperator, GridOperator] | None = None
    warning: str | None = None

    @property
    def grid(self) -> np.ndarray:
        return self.zero.grid

    def casimir(self, f: np.ndarray) -> np.ndarray:
        """C^2 f, with C^2 = J0^2 - J1^2 - J2^2 (Cartesian) or J0^2 - J0 - J+ J-."""
        f = np.asarray(f, dtype=float)
        if self.cartesian is not None:
            j0, j1, a = self.cartesian
            return j0(j0(f)) - j1(j1(f)) + a(a(f))
        z = self.zero(f)
        return self.zero(z) - z - self.plus(self.minus(f))


def _measure(family: Family, grid: np.ndarray) -> np.ndarray:
    if family in (Family.B_HT, Family.R_HS, Family.K_MS):
        return 1.0 / grid
    return np.ones_like(grid)


def _op(grid, diag_terms, d1=None, d2=None, label=""):
    """sum of diag(c0) + diag(c1) D1 + diag(c2) D2."""
    c0, c1, c2 = diag_terms
    n = grid.size
    m = sparse.diags(np.broadcast_to(c0, (n,)).astype(float))
    if c1 is not None:
        m = m + sparse.diags(np.broadcast_to(c1, (n,)).astype(float)) @ d1
    if c2 is not None:
        m = m + sparse.diags(np.broadcast_to(c2, (n,)).astype(float)) @ d2
    return GridOperator(sparse.csr_matrix(m), grid, label)


def _beta(params: CouplingParams, epsilon: float, delta: float = 1.0) -> float:
    w = one_minus_eps2(params, epsilon)
    if not w > 0:
        raise ValueError("generators need |epsilon| < mu")
    return math.sqrt(w) / (params.alpha * delta)


def decay_length(family: Family, params: CouplingParams, epsilon: float) -> float:
    if family is Family.R_HS:
        return 1.0 / _beta(params, epsilon)
    if family is Family.K_MS:
        return 1.0 / abs(params.gamma_mt)
    if family is Family.J_LS:
        return 1.0 / math.sqrt(params.nu)
    return 1.0


def _resolution_warning(family, params, epsilon, grid) -> str | None:
    length = decay_length(family, params, epsilon)
    # half-line families: judge the region around the low-lying peaks
    window = grid <= 4 * length if family is not Family.J_LS else np.ones_like(grid, dtype=bool)
    h = np.diff(grid)[window[:-1]]
    if h.size and h.max() > length / MIN_POINTS_PER_LENGTH:
        return (f"{family.value}: grid spacing {h.max():.3g} exceeds decay length "
                f"{length:.3g} / {MIN_POINTS_PER_LENGTH}")
    return None


def build_generators(family: Family | str, params: CouplingParams, epsilon: float,
                     grid, k_linear: float = 0.25) -> GeneratorTriple:
    """Assemble the triple for ``family`` on ``grid`` (r, rho or y as appropriate)."""
    family = Family(family)
    system = family.system
    check(params, system)
    grid = np.asarray(grid, dtype=float)
    if family.variable != "y" and np.any(grid <= 0):
        raise ValueError(f"{family.value} needs a positive grid")
    d1, d2 = fd.derivative_matrices(grid)
    x = grid
    k = bargmann_index(system, params, epsilon, k_linear)
    zero_c = np.zeros_like(x)

    if family in (Family.B_HT, Family.R_HS):
        th = params.theta
        X = _op(x, (th * (th + 1) / x, None, -x), d1, d2, "X")
        A = _op(x, (zero_c, x, None), d1, d2, "A")
        scale = 1.0 if family is Family.B_HT else _beta(params, epsilon)
    elif family is Family.L_MT:
        beta = _beta(params, epsilon, params.delta)
        X = _op(x, (beta ** 2 / x, -np.ones_like(x), -x), d1, d2, "X'")
        A = _op(x, (np.full_like(x, 0.5), x, None), d1, d2, "A'")
        scale = 1.0
    elif family is Family.K_MS:
        beta = _beta(params, epsilon, params.delta)
        X = _op(x, ((beta ** 2 - 0.25) / x, None, -x), d1, d2, "X")
        A = _op(x, (zero_c, x, None), d1, d2, "A")
        scale = abs(params.gamma_mt)
    else:
        nu = params.nu
        sq = _op(x, (nu ** 2 * x ** 2, None, -np.ones_like(x)), d1, d2, "-D2+nu2y2")
        # (nu y -+ D)^2 = nu^2 y^2 -+ nu (y D + D y) + D^2, with D y = y D + 1
        cross = _op(x, (np.full_like(x, nu), 2 * nu * x, None), d1, d2, "nu(yD+Dy)")
        square_plus = _op(x, (nu ** 2 * x ** 2, None, np.ones_like(x)), d1, d2, "nu2y2+D2")
        zero = sq.scaled(1 / (4 * nu), "J0")
        plus = (square_plus - cross).scaled(1 / (4 * nu), "J+")
        minus = (square_plus + cross).scaled(1 / (4 * nu), "J-")
        warn = _resolution_warning(family, params, epsilon, grid)
        if warn:
            warnings.warn(warn, UnderResolvedGridWarning, stacklevel=2)
        return GeneratorTriple(plus, minus, zero, family, k, _measure(family, grid), None, warn)

    # X/s +- s x (s = 1 recovers the unscaled Cartesian pair)
    xs = X.scaled(1 / scale)
    lin = _op(x, (scale * x, None, None), d1, d2, "x")
    zero = (xs + lin).scaled(0.5, "J0")
    one = (xs - lin).scaled(0.5, "J1")
    if family.cartesian:
        plus = (one + A)
        minus = (one - A)
        cart = (zero, one, A)
    else:
        # ladder form: J+- = -+A + s x - J0 = -(J1 +- A)
        plus = (one + A).scaled(-1.0, "J+")
        minus = (one - A).scaled(-1.0, "J-")
        cart = None
    plus = GridOperator(plus.matrix, grid, "J+")
    minus = GridOperator(minus.matrix, grid, "J-")
    warn = _resolution_warning(family, params, epsilon, grid)
    if warn:
        warnings.warn(warn, UnderResolvedGridWarning, stacklevel=2)
    return GeneratorTriple(plus, minus, zero, family, k, _measure(family, grid), cart, warn)


# -- norms -------------------------------------------------------------------

def trimmed_norm(values, grid, measure=None, trim: int = BOUNDARY_TRIM) -> float:
    """sqrt(int v^2 measure) over the grid with ``trim`` points dropped at each end."""
    values = np.asarray(values, dtype=float)
    grid = np.asarray(grid, dtype=float)
    measure = np.ones_like(grid) if measure is None else np.asarray(measure, dtype=float)
    sl = slice(trim, grid.size - trim if trim else None)
    return math.sqrt(max(fd.integrate_samples(grid[sl], (values ** 2 * measure)[sl]), 0.0))


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, RadialFunction) else np.asarray(f, dtype=float)


def _rel(triple: GeneratorTriple, residual, f, trim: int) -> float:
    return (trimmed_norm(residual, triple.grid, triple.measure, trim)
            / trimmed_norm(f, triple.grid, triple.measure, trim))


# -- checks ------------------------------------------------------------------

def commutator_residuals(triple: GeneratorTriple, testfns, trim: int = BOUNDARY_TRIM) -> dict[str, float]:
    """Per-relation max over ``testfns`` of the trimmed relative residual."""
    out: dict[str, float] = {}

    def record(name, value):
        out[name] = max(out.get(name, 0.0), value)

    for fn in testfns:
        f = _values(fn)
        if triple.cartesian is not None:
            j0, j1, a = triple.cartesian
            record("[J0,J1]-A", _rel(triple, j0(j1(f)) - j1(j0(f)) - a(f), f, trim))
            record("[A,J0]+J1", _rel(triple, a(j0(f)) - j0(a(f)) + j1(f), f, trim))
            record("[A,J1]+J0", _rel(triple, a(j1(f)) - j1(a(f)) + j0(f), f, trim))
        else:
            jp, jm, j0 = triple.plus, triple.minus, triple.zero
            record("[J0,J+]-J+", _rel(triple, j0(jp(f)) - jp(j0(f)) - jp(f), f, trim))
            record("[J0,J-]+J-", _rel(triple, j0(jm(f)) - jm(j0(f)) + jm(f), f, trim))
            record("[J-,J+]-2J0", _rel(triple, jm(jp(f)) - jp(jm(f)) - 2 * j0(f), f, trim))
    return out


def commutator_residual(triple: GeneratorTriple, testfns, trim: int = BOUNDARY_TRIM) -> float:
    return max(commutator_residuals(triple, testfns, trim).values())


def casimir_residual(triple: GeneratorTriple, eigenfn, trim: int = BOUNDARY_TRIM) -> float:
    f = _values(eigenfn)
    k = triple.k
    return _rel(triple, triple.casimir(f) - k * (k - 1) * f, f, trim)


def zero_residual(triple: GeneratorTriple, eigenfn, n: int, trim: int = BOUNDARY_TRIM) -> float:
    """||(J0 - (k + n)) f|| / ||f||."""
    f = _values(eigenfn)
    return _rel(triple, triple.zero(f) - (triple.k + n) * f, f, trim)


def ladder_action_check(triple: GeneratorTriple, k: float, n: int, eigfns,
                        trim: int = BOUNDARY_TRIM) -> float:
    """Max deviation of J+- f_n from sqrt((n+1)(2k+n)) f_{n+1} and sqrt(n(2k+n-1)) f_{n-1}.

    ``eigfns[m]`` must be normalized in the family's invariant measure.  The
    basis phase is not fixed by the closed forms, so each comparison is aligned
    by the sign of the overlap.  Deviations are relative to ||f_n||.
    """
    g, mu = triple.grid, triple.measure
    f = _values(eigfns[n])
    norm = trimmed_norm(f, g, mu, trim)
    devs = []
    for op, m, coeff in ((triple.plus, n + 1, math.sqrt((n + 1) * (2 * k + n))),
                         (triple.minus, n - 1, math.sqrt(max(n * (2 * k + n - 1), 0.0)))):
        image = op(f)
        if m < 0:
            devs.append(trimmed_norm(image, g, mu, trim) / norm)
            continue
        if m >= len(eigfns):
            continue
        target = _values(eigfns[m])
        sl = slice(trim, g.size - trim)
        overlap = fd.integrate_samples(g[sl], (image * target * mu)[sl])
        sign = 1.0 if overlap >= 0 else -1.0
        devs.append(trimmed_norm(image - sign * coeff * target, g, mu, trim) / norm)
    return max(devs) if devs else 0.0


# -- basis states ------------------------------------------------------------

def basis_function(family: Family | str, params: CouplingParams, epsilon: float, n: int,
                   grid, k_linear: float = 0.25) -> RadialFunction:
    """|k, n> of the triple built at ``epsilon``, normalized in the invariant measure."""
    family = Family(family)
    x = np.asarray(grid, dtype=float)
    if family is Family.J_LS:
        nu = params.nu
        big_n = oscillator_level(k_linear, n)
        vals = np.exp(-0.5 * nu * x * x) * hermite(big_n, math.sqrt(nu) * x)
        log_norm = 0.5 * math.log(math.pi) + big_n * math.log(2) + math.lgamma(big_n + 1) - 0.5 * math.log(nu)
    else:
        k = bargmann_index(family.system, params, epsilon)
        if family is Family.B_HT or family is Family.L_MT:
            s = 1.0
        elif family is Family.R_HS:
            s = _beta(params, epsilon)
        else:
            s = abs(params.gamma_mt)
        power = k if family is not Family.L_MT else k - 0.5
        vals = x ** power * np.exp(-s * x) * laguerre(n, 2 * k - 1, 2 * s * x)
        log_norm = math.lgamma(n + 2 * k) - math.lgamma(n + 1) - 2 * k * math.log(2 * s)
    return RadialFunction(x, vals * math.exp(-0.5 * log_norm), family.variable,
                          {"family": family.value, "n": n, "epsilon": epsilon})


def family_eigenfunction(family: Family | str, params: CouplingParams, level: EnergyLevel,
                         grid) -> RadialFunction:
    """The closed-form upper component of ``level`` expressed in the family's variable.

    R_HS uses G1(r) and K_MS uses sqrt(rho) F1(rho) as they stand; B_HT and L_MT
    act on the dilated G1(r/beta) and F1(rho/q); J_LS uses G1 at r = y - center.
    """
    family = Family(family)
    if level.system.potential != family.system.potential:
        raise ValueError(f"level for {level.system.value} does not match family {family.value}")
    x = np.asarray(grid, dtype=float)
    eps = level.epsilon
    if family is Family.R_HS:
        vals = hydrogen_components(params, level, x)[0]
    elif family is Family.B_HT:
        vals = hydrogen_components(params, level, x / _beta(params, eps))[0]
    elif family is Family.K_MS:
        vals = np.sqrt(x) * morse_components(params, level, x)[0]
    elif family is Family.L_MT:
        vals = morse_components(params, level, x / abs(params.gamma_mt))[0]
    else:
        center = decoupled_ode_coeffs(level.system, params, eps).center
        vals = linear_components(params, level, x - center)[0]
    return RadialFunction(x, vals, family.variable,
                          {"family": family.value, "n": level.n, "epsilon": eps})


def family_grid(family: Family | str, params: CouplingParams, epsilon: float, n_max: int = 4,
                points: int = 2000, k_linear: float = 0.25) -> np.ndarray:
    """Uniform grid covering basis states 0..n_max+1 of the family built at ``epsilon``.

    The half-line families start at half a decay length: nested second-order
    stencils amplify rounding like h^-4 x^-2 near the origin, and the checks
    are local identities that do not need the power-law region.
    """
    family = Family(family)
    length = decay_length(family, params, epsilon)
    if family is Family.J_LS:
        big_n = oscillator_level(k_linear, n_max + 1)
        half = math.sqrt((2 * big_n + 1) / params.nu) + math.sqrt(80 / params.nu)
        return fd.uniform_grid(-half, half, points)
    k = bargmann_index(family.system, params, epsilon)
    hi = (40 + 4 * (n_max + 1) + 2 * k) * length
    return fd.uniform_grid(0.5 * length, hi, points)


# -- dilation ------------------------------------------------------------------

def tilt(phi: float, f: RadialFunction, grid=None) -> RadialFunction:
    """(tilt f)(r) = e^{-phi/2} f(e^{-phi} r) sampled on ``grid`` (default f.grid).

    Resampling is a cubic spline in ln r on geometric grids and in r otherwise.
    """
    target = f.grid if grid is None else np.asarray(grid, dtype=float)
    if phi == 0 and grid is None:
        return f
    src = target * math.exp(-phi)
    lo, hi = f.grid[0], f.grid[-1]
    slack = 1e-12 * (hi - lo)
    if src.min() < lo - slack or src.max() > hi + slack:
        raise ValueError(f"tilt by phi={phi:g} leaves the sampled range [{lo:g}, {hi:g}]")
    src = np.clip(src, lo, hi)
    if fd.classify(f.grid) is fd.Spacing.GEOMETRIC:
        spline = CubicSpline(np.log(f.grid), f.values)
        vals = spline(np.log(src))
    else:
        vals = CubicSpline(f.grid, f.values)(src)
    return RadialFunction(target, math.exp(-0.5 * phi) * vals, f.variable, dict(f.meta))


def conjugation_residual(params: CouplingParams, phi: float, f: RadialFunction, sign: int = 1,
                         trim: int = BOUNDARY_TRIM) -> float:
    """||tilt (B0 +- B1) tilt^-1 f - e^{+-phi} (B0 +- B1) f|| / ||f||.

    ``f`` must sit on a geometric r grid wide enough that both dilations stay
    inside it; the comparison runs on the sub-grid reachable by both.
    """
    g = f.grid
    e = math.exp(phi)
    tol = 1 + 1e-12
    if phi >= 0:
        mid_mask = g * e <= g[-1] * tol
        inner_mask = (g >= g[0] * e / tol) & mid_mask
    else:
        mid_mask = g * e >= g[0] / tol
        inner_mask = (g <= g[-1] * e * tol) & mid_mask
    mid, inner = g[mid_mask], g[inner_mask]
    if inner.size < 4 * trim + 10:
        raise ValueError("grid too narrow for the requested dilation")

    def op_on(grid):
        j0, j1, _ = build_generators(Family.B_HT, params, 0.0, grid).cartesian
        return j0 + j1 if sign > 0 else j0 - j1

    image = op_on(mid)(tilt(-phi, f, mid))
    lhs = tilt(phi, image, inner).values
    rhs = math.exp(sign * phi) * op_on(g)(f.values)[inner_mask]
    meas = 1.0 / inner
    return (trimmed_norm(lhs - rhs, inner, meas, trim)
            / trimmed_norm(f.values[inner_mask], inner, meas, trim))


def tilting_identity_residual(params: CouplingParams, level: EnergyLevel, points: int = 2000,
                              trim: int = BOUNDARY_TRIM) -> float:
    """||(B0 - (k + n)) tilt_phi(G1)|| / ||tilt_phi(G1)|| with phi = ln beta."""
    if level.system.potential != "hydrogen":
        raise ValueError("the tilting identity is stated for hydrogen levels")
    beta = _beta(params, level.epsilon)
    phi = math.log(beta)
    target = family_grid(Family.B_HT, params, level.epsilon, level.n, points)
    source = fd.geometric_grid(target[0] / beta / 1.01, target[-1] / beta * 1.01, 4 * points)
    g1 = RadialFunction(source, hydrogen_components(params, level, source)[0], "r")
    tilted = tilt(phi, g1, target)
    triple = build_generators(Family.B_HT, params, level.epsilon, target)
    return zero_residual(triple, tilted, level.n, trim)
