"""Couplings, decoupled radial equations and the lower-component map.

Conventions
-----------
``s = sin 2eta`` and ``c = cos 2eta``.  With V = a z(r) and U = b z(r) the
upper component obeys

    G'' + [kappa z' - 2 (b + eps a) z - kappa**2 z**2 - (1 - eps**2)/alpha**2] G = 0,
    kappa = alpha (a c - b) / s,

and the lower component follows from

    G2 = alpha/(c + eps) * [-s/alpha + kappa z + d/dr] G1.

Hydrogen uses z = 1/r, a = Z.  The linear system uses z = r.  The Morse
equation as used here (upper sign of the e^{-delta r} terms positive for
a c + b > 0) corresponds to V = -a e^{-delta r}, U = b e^{-delta r}; the same
pair is fed to the lower-component map so both stay mutually consistent.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import fd
from .radial import RadialFunction


class ValidationError(ValueError):
    """One or more coupling constraints are violated."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


class SystemKind(enum.Enum):
    HYDROGEN_TILTING = "HydrogenTilting"
    HYDROGEN_FACTORIZATION = "HydrogenFactorization"
    MORSE_TILTING = "MorseTilting"
    MORSE_FACTORIZATION = "MorseFactorization"
    LINEAR_FACTORIZATION = "LinearFactorization"

    @property
    def potential(self) -> str:
        for name in ("hydrogen", "morse", "linear"):
            if self.value.lower().startswith(name):
                return name
        raise AssertionError(self)

    @property
    def method(self) -> str:
        return "tilting" if self.value.endswith("Tilting") else "factorization"

    @classmethod
    def parse(cls, text: str) -> "SystemKind":
        key = text.replace("-", "_").replace(" ", "_").lower()
        aliases = {
            "hydrogen": cls.HYDROGEN_TILTING,
            "morse": cls.MORSE_TILTING,
            "linear": cls.LINEAR_FACTORIZATION,
        }
        if key in aliases:
            return aliases[key]
        for kind in cls:
            if key in (kind.name.lower(), kind.value.lower()):
                return kind
        raise ValueError(f"unknown system {text!r}")


@dataclass(frozen=True)
class CouplingParams:
    alpha: float
    eta: float
    a: float = 0.0
    b: float = 0.0
    Z: float = 1.0
    delta: float = 1.0
    angular_lambda: float = 0.0
    mu: float = 1.0

    @property
    def s(self) -> float:
        return math.sin(2 * self.eta)

    @property
    def c(self) -> float:
        return math.cos(2 * self.eta)

    @property
    def theta(self) -> float:
        """Hydrogen centrifugal parameter alpha (Z c - b)/s."""
        return self.alpha * (self.Z * self.c - self.b) / self.s

    @property
    def nu(self) -> float:
        """Linear-potential oscillator frequency alpha (b - a c)/s."""
        return self.alpha * (self.b - self.a * self.c) / self.s

    @property
    def gamma_mt(self) -> float:
        """Morse decay scale alpha (a c + b)/(s delta); its sign is kept."""
        return self.alpha * (self.a * self.c + self.b) / (self.s * self.delta)

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in
                ("alpha", "eta", "a", "b", "Z", "delta", "angular_lambda", "mu")}


def validate(params: CouplingParams, system: SystemKind | None = None) -> list[str]:
    """Every violated constraint, as human-readable strings (empty when valid)."""
    problems = []
    for name, value in params.as_dict().items():
        if not math.isfinite(value):
            problems.append(f"{name} must be finite")
    if problems:
        return problems
    if not params.alpha > 0:
        problems.append("alpha must be > 0")
    if not 0 < params.eta < math.pi / 2:
        problems.append("eta must lie in (0, pi/2)")
    if abs(params.s) < 1e-9:
        problems.append("sin(2η)=0 singular coupling")
        return problems
    if not params.mu > 0:
        problems.append("mu must be > 0")
    if system is None:
        return problems
    kind = system.potential
    if kind == "hydrogen":
        if not params.theta > -0.5:
            problems.append("hydrogen needs alpha(Z cos2η - b)/sin2η > -1/2 (Bargmann index k > 1/2)")
    elif kind == "morse":
        if not params.delta > 0:
            problems.append("delta must be > 0 for the Morse system")
        elif abs(params.a * params.c + params.b) <= 1e-12 * (abs(params.a) + abs(params.b)):
            problems.append("Morse needs a cos2η + b != 0 (gamma_MT = 0)")
    elif kind == "linear":
        if not params.nu > 0:
            problems.append("linear potential needs ν = α(b − a·cos2η)/sin2η > 0")
    if params.mu != 1.0 and kind != "hydrogen":
        problems.append("mu != 1 is only supported for the hydrogen spectrum")
    return problems


def check(params: CouplingParams, system: SystemKind | None = None) -> None:
    problems = validate(params, system)
    if problems:
        raise ValidationError(problems)


def potentials(system: SystemKind, params: CouplingParams, r):
    """(V, U) at physical radius r for the system's z(r)."""
    r = np.asarray(r, dtype=float)
    kind = system.potential
    if kind == "hydrogen":
        return params.Z / r, params.b / r
    if kind == "morse":
        z = np.exp(-params.delta * r)
        return -params.a * z, params.b * z
    return params.a * r, params.b * r


def effective_vector_potential(params: CouplingParams, r, system: SystemKind = SystemKind.HYDROGEN_TILTING):
    """A(r) that decouples the radial pair.

    Written as alpha V/s - alpha c U/s - (lambda/r)(1 + alpha^2 U), which is the
    same expression with the cos 2eta factor cancelled so that cos 2eta = 0 is
    regular.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise ValueError("effective_vector_potential needs r > 0")
    check(params)
    V, U = potentials(system, params, r_arr)
    al, s, c, lam = params.alpha, params.s, params.c, params.angular_lambda
    out = al * V / s - al * c * U / s - lam / r_arr * (1 + al ** 2 * U)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ODECoeffs:
    """G'' + Q(x) G = 0 in the system's natural variable.

    ``variant == "laurent"``: Q = A/x + B/x**2 + C (hydrogen in r; Morse in
    rho for the EDMOR unknown sqrt(rho) * G1).
    ``variant == "oscillator"``: Q = -(nu**2 y**2 - shift) with
    y = r + center (linear potential).
    """

    system: SystemKind
    variant: str
    A: float = 0.0
    B: float = 0.0
    C: float = 0.0
    nu: float = 0.0
    shift: float = 0.0
    center: float = 0.0
    extra: dict = field(default_factory=dict)

    def q(self, x):
        x = np.asarray(x, dtype=float)
        if self.variant == "laurent":
            return self.A / x + self.B / x ** 2 + self.C
        return -(self.nu ** 2 * x ** 2 - self.shift)

    def A_of(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.A)

    def B_of(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.B)

    def C_of(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.C)


def one_minus_eps2(params: CouplingParams, eps: float) -> float:
    m = params.mu
    return (m - eps) * (m + eps)


def decoupled_ode_coeffs(system: SystemKind, params: CouplingParams, epsilon: float) -> ODECoeffs:
    check(params, system)
    al = params.alpha
    kind = system.potential
    w = one_minus_eps2(params, epsilon)
    if kind == "hydrogen":
        th = params.theta
        return ODECoeffs(system, "laurent",
                         A=-2 * (params.b + epsilon * params.Z),
                         B=-th * (th + 1),
                         C=-w / al ** 2,
                         extra={"theta": th})
    if kind == "morse":
        d = params.delta
        kappa = al * (params.a * params.c + params.b) / params.s
        p = d * kappa + 2 * (epsilon * params.a - params.b)
        beta2 = w / (al * d) ** 2
        return ODECoeffs(system, "laurent",
                         A=p / d ** 2,
                         B=0.25 - beta2,
                         C=-(kappa / d) ** 2,
                         extra={"kappa": kappa, "p": p, "beta2": beta2})
    nu = params.nu
    drive = params.b + epsilon * params.a
    v_shift = drive ** 2 / nu ** 2 - nu
    return ODECoeffs(system, "oscillator",
                     nu=nu,
                     shift=v_shift - w / al ** 2,
                     center=drive / nu ** 2,
                     extra={"V_shift": v_shift})


def radial_q(system: SystemKind, params: CouplingParams, epsilon: float, r):
    """Coefficient Q(r) of G'' + Q G = 0 in the physical radius r.

    For the Morse system r runs over the whole real line (rho = e^{-delta r}
    in (0, inf)).
    """
    r = np.asarray(r, dtype=float)
    al = params.alpha
    w = one_minus_eps2(params, epsilon)
    kind = system.potential
    if kind == "hydrogen":
        th = params.theta
        return -th * (th + 1) / r ** 2 - 2 * (params.b + epsilon * params.Z) / r - w / al ** 2
    if kind == "morse":
        kappa = al * (params.a * params.c + params.b) / params.s
        e = np.exp(-params.delta * r)
        p = params.delta * kappa + 2 * (epsilon * params.a - params.b)
        return -kappa ** 2 * e ** 2 + p * e - w / al ** 2
    nu = params.nu
    return -nu - 2 * (params.b + epsilon * params.a) * r - nu ** 2 * r ** 2 - w / al ** 2


def lower_component(system: SystemKind, params: CouplingParams, epsilon: float,
                    g1: RadialFunction) -> RadialFunction:
    """Apply the first-order map G1 -> G2 with fourth-order differences.

    ``g1`` lives on r for hydrogen and the linear system, on rho for Morse,
    or on y = r + center for the linear system.
    """
    check(params, system)
    if params.mu != 1.0:
        raise ValidationError(["lower-component map is written for unit rest mass (mu = 1)"])
    if len(g1) < 6:
        raise ValueError("lower_component needs at least 6 samples")
    denom = params.c + epsilon
    if abs(denom) < 1e-14:
        raise ZeroDivisionError("cos(2η) + ε = 0: lower-component map is singular")
    al, s = params.alpha, params.s
    x = g1.grid
    d1, _ = fd.derivative_matrices(x)
    dg = d1 @ g1.values
    if g1.variable == "rho":
        r = -np.log(x) / params.delta
        dg_dr = -params.delta * x * dg
    elif g1.variable == "y":
        r = x - decoupled_ode_coeffs(system, params, epsilon).center
        dg_dr = dg
    else:
        r = x
        dg_dr = dg
    V, U = potentials(system, params, r)
    g2 = al / denom * ((-s / al + al / s * (params.c * V - U)) * g1.values + dg_dr)
    return g1.with_values(g2, component="G2")
