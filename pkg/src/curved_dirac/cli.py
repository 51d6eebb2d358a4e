"""Command-line interface: spectra, wavefunction samples, oracle scans and verification.

Exit codes: 0 success, 1 no bound state, 2 invalid input, 3 verification failure.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import click
import numpy as np
from scipy import integrate

from . import fd, oracle, report, spectrum, wavefunc
from .constants import DEFAULT_SEED, FLOAT_DIGITS, GRID_POINTS, THREADS_ENV
from .model import CouplingParams, SystemKind, ValidationError, check
from .spectrum import LINEAR_K, Branch, NoBoundStateError

EXIT_OK, EXIT_NO_SOLUTION, EXIT_INVALID, EXIT_VERIFY = 0, 1, 2, 3

PARAM_KEYS = ("alpha", "eta", "a", "b", "Z", "delta", "angular_lambda", "mu")
CONFIG_KEYS = {
    **{k: float for k in PARAM_KEYS},
    "system": str, "n": str, "branch": str, "k": str, "format": str,
    "points": int, "r_max": float, "rho_min": float, "grading": str, "seed": int,
}
DEFAULTS = {"alpha": 0.0072973525693, "eta": math.pi / 4, "a": 0.0, "b": 0.0, "Z": 1.0,
            "delta": 1.0, "angular_lambda": 0.0, "mu": 1.0, "system": "hydrogen",
            "format": "csv", "seed": DEFAULT_SEED}


class UsageProblem(Exception):
    """Bad input that maps to exit code 2."""


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), f".{FLOAT_DIGITS}g")
    return str(x)


def parse_config(text: str) -> dict:
    """Flat key=value lines; '#' starts a comment; unknown keys are rejected."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageProblem(f"config line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise UsageProblem(f"config line {lineno}: unknown key {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](value)
        except ValueError:
            raise UsageProblem(f"config line {lineno}: bad value for {key}: {value!r}") from None
    return out


def parse_n_range(text: str) -> list[int]:
    """'3', '0..3' (inclusive) or '0,2,5'."""
    try:
        if ".." in text:
            lo, hi = (int(s) for s in text.split("..", 1))
            values = list(range(lo, hi + 1))
        else:
            values = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageProblem(f"bad n selector {text!r}") from None
    if not values or min(values) < 0:
        raise UsageProblem(f"n selector {text!r} must name non-negative integers")
    return values


@dataclass
class Settings:
    values: dict

    def __getitem__(self, key):
        return self.values.get(key)

    @property
    def params(self) -> CouplingParams:
        return CouplingParams(**{k: float(self.values[k]) for k in PARAM_KEYS})

    @property
    def system(self) -> SystemKind:
        try:
            return SystemKind.parse(self.values["system"])
        except ValueError as exc:
            raise UsageProblem(str(exc)) from None


def settings(config_path, **flags) -> Settings:
    values = dict(DEFAULTS)
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            values.update(parse_config(fh.read()))
    values.update({k: v for k, v in flags.items() if v is not None})
    return Settings(values)


def emit(rows: list[dict], columns: list[str], form: str, out, comments=()) -> None:
    if form == "json":
        json.dump([{c: r[c] for c in columns} for r in rows], out, indent=2)
        out.write("\n")
        return
    if form != "csv":
        raise UsageProblem(f"unknown format {form!r}")
    for line in comments:
        out.write(f"# {line}\n")
    w = csv.writer(out, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run_guarded(fn):
    """Map library exceptions onto the exit-code contract."""
    try:
        code = fn()
    except (ValidationError, UsageProblem) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INVALID)
    except NoBoundStateError as exc:
        click.echo(f"no bound state: {exc}", err=True)
        sys.exit(EXIT_NO_SOLUTION)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INVALID)
    sys.exit(code or EXIT_OK)


def param_options(fn):
    opts = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     help="key=value file; flags override it"),
        click.option("--system", help="hydrogen, morse, linear or a full system name"),
        click.option("--alpha", type=float),
        click.option("--eta", type=float),
        click.option("--a", "a", type=float),
        click.option("--b", "b", type=float),
        click.option("--Z", "Z", type=float),
        click.option("--delta", type=float),
        click.option("--lambda", "angular_lambda", type=float),
        click.option("--mu", type=float),
        click.option("--format", "format", type=click.Choice(["csv", "json"])),
        click.option("--output", "-o", type=click.Path(dir_okay=False), help="write the table here"),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _open_out(path):
    return open(path, "w", encoding="utf-8", newline="") if path else None


def _write(path, writer):
    handle = _open_out(path)
    if handle is None:
        buf = io.StringIO()
        writer(buf)
        click.echo(buf.getvalue(), nl=False)
        return
    with handle:
        writer(handle)


def _branches(text) -> list[Branch]:
    if text in (None, "both"):
        return [Branch.PLUS, Branch.MINUS]
    try:
        return [Branch(text.capitalize())]
    except ValueError:
        raise UsageProblem(f"branch must be plus, minus or both, not {text!r}") from None


def _k_values(text) -> tuple[float, ...]:
    if text in (None, "both"):
        return LINEAR_K
    try:
        k = float(text)
    except ValueError:
        raise UsageProblem(f"k must be 0.25, 0.75 or both, not {text!r}") from None
    if k not in LINEAR_K:
        raise UsageProblem("linear Bargmann index must be 0.25 or 0.75")
    return (k,)


@click.group()
def main():
    """Dirac bound states in static curved space-time."""


# -- spectrum --------------------------------------------------------------------

SPECTRUM_COLUMNS = ["system", "method", "n", "epsilon", "bargmann_k", "branch", "quantization_residual"]


def spectrum_rows(system: SystemKind, params: CouplingParams, n_values, branches, k_values):
    check(params, system)

    def rows_for(n):
        out = []
        for lv in spectrum.all_levels(system, params, [n], k_values):
            if lv.branch not in branches and system.potential != "hydrogen":
                continue
            res = spectrum.quantization_residual(system, params, lv.n, lv.epsilon, lv.k)
            out.append({"system": system.value, "method": system.method, "n": lv.n,
                        "epsilon": lv.epsilon, "bargmann_k": lv.k, "branch": lv.branch.value,
                        "quantization_residual": res})
        return out

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        chunks = list(pool.map(rows_for, n_values))
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r["n"], r["bargmann_k"], r["branch"] != Branch.PLUS.value))
    return rows


@main.command("spectrum")
@param_options
@click.option("--n", "n", help="level(s): 3, 0..3 or 0,2")
@click.option("--branch", help="plus, minus or both (Morse and linear)")
@click.option("--k", "k", help="linear Bargmann index 0.25, 0.75 or both")
def cmd_spectrum(config_path, output, n, branch, k, **flags):
    """Closed-form energy levels."""
    def run():
        s = settings(config_path, n=n, branch=branch, k=k, **flags)
        system = s.system
        rows = spectrum_rows(system, s.params, parse_n_range(s["n"] or "0"),
                             _branches(s["branch"]), _k_values(s["k"]))
        if not rows:
            raise NoBoundStateError(f"no level for n={s['n'] or '0'} in {system.value}")
        _write(output, lambda out: emit(rows, SPECTRUM_COLUMNS, s["format"], out))
    run_guarded(run)


# -- wavefunction ----------------------------------------------------------------

def _level(system, params, n, branch, k):
    if system.potential == "hydrogen":
        return spectrum.energy(system, params, n)
    return spectrum.energy(system, params, n, branch, k)


def wavefunction_table(system, params, level, points, r_max=None, rho_min=None, grading=None):
    """(grid, c1, c2, names, norm) with the components scaled by the normalization constant."""
    kind = system.potential
    grid = wavefunc.default_grid(params, level, points, rho_max=1.0 if kind == "morse" else None)
    if kind == "hydrogen" and r_max is not None:
        grid = fd.geometric_grid(grid[0], r_max, points)
    if kind == "morse" and rho_min is not None:
        grid = fd.geometric_grid(rho_min, 1.0, points)
    if grading == "uniform":
        grid = fd.uniform_grid(grid[0], grid[-1], points)
    g1, g2 = wavefunc.radial(params, level, grid)
    if kind == "linear":
        integral = wavefunc.sampled_norm(g1, g2, params)
        norm = wavefunc.NormConstant(1 / math.sqrt(integral), wavefunc.NormMethod.NUMERIC,
                                     {"integral": integral}, "")
    else:
        norm = wavefunc.norm_constant(params, level)
    names = ("rho", "F1", "F2") if kind == "morse" else ("r", "G1", "G2")
    return grid, norm.value * g1.values, norm.value * g2.values, names, norm


def norm_check(system, params, level, norm, grid) -> float:
    """Normalization integral of the emitted functions by adaptive quadrature."""
    if system.potential != "linear":
        return norm.value ** 2 * report.independent_norm_integral(params, level)

    def dens(r):
        g1, g2 = wavefunc.linear_components(params, level, r)
        return (g1 ** 2 + g2 ** 2) * (1 + params.alpha ** 2 * params.b * r)

    value, _ = integrate.quad(dens, grid[0], grid[-1], epsabs=0.0, epsrel=1e-12, limit=500)
    return norm.value ** 2 * value


@main.command("wavefunction")
@param_options
@click.option("--n", "n", type=int, default=None)
@click.option("--branch", help="plus or minus (Morse and linear)")
@click.option("--k", "k", help="linear Bargmann index 0.25 or 0.75")
@click.option("--points", type=int)
@click.option("--r-max", "r_max", type=float, help="hydrogen outer radius")
@click.option("--rho-min", "rho_min", type=float, help="Morse inner rho (outer is 1)")
@click.option("--grading", type=click.Choice(["geometric", "uniform"]))
@click.option("--check-norm", is_flag=True, help="report the normalization integral")
def cmd_wavefunction(config_path, output, n, branch, k, points, r_max, rho_min, grading,
                     check_norm, **flags):
    """Normalized radial components sampled on a grid."""
    def run():
        s = settings(config_path, n=None if n is None else str(n), branch=branch, k=k,
                     points=points, r_max=r_max, rho_min=rho_min, grading=grading, **flags)
        system, params = s.system, s.params
        check(params, system)
        npts = s["points"] or GRID_POINTS
        if npts < 6:
            raise UsageProblem("points must be >= 6")
        level = _level(system, params, int(s["n"] or 0),
                       _branches(s["branch"] or "plus")[0], _k_values(s["k"] or "0.25")[0])
        grid, c1, c2, names, norm = wavefunction_table(system, params, level, npts,
                                                       s["r_max"], s["rho_min"], s["grading"])
        rows = [{names[0]: x, names[1]: u, names[2]: v} for x, u, v in zip(grid, c1, c2)]
        meta = (f"system={system.value} n={level.n} epsilon={fmt(level.epsilon)} "
                f"k={fmt(level.k)} branch={level.branch.value} normalization={norm.method.value} "
                f"N={fmt(norm.value)}")
        comments = [meta] + ([f"finding: {norm.finding}"] if norm.finding else [])
        _write(output, lambda out: emit(rows, list(names), s["format"], out, comments))
        if check_norm:
            click.echo(f"# norm_integral={fmt(norm_check(system, params, level, norm, grid))}")
    run_guarded(run)


# -- shoot -------------------------------------------------------------------------

SHOOT_COLUMNS = ["n_nodes", "epsilon", "defect", "tolerance"]
SHOOT_TOLERANCE = 1e-6


@main.command("shoot")
@param_options
@click.option("--eps-min", type=float, help="lower end of the energy scan")
@click.option("--eps-max", type=float, help="upper end of the energy scan")
@click.option("--n-max", type=int, default=3, show_default=True)
def cmd_shoot(config_path, output, eps_min, eps_max, n_max, **flags):
    """Bound states from the shooting oracle."""
    def run():
        s = settings(config_path, **flags)
        system, params = s.system, s.params
        check(params, system)
        mu = params.mu
        lo = -mu if eps_min is None else eps_min
        hi = mu if eps_max is None else eps_max
        found = oracle.find_bound_states(system, params, (lo, hi), n_max=n_max)
        rows = [{"n_nodes": r.n_nodes, "epsilon": r.epsilon, "defect": r.defect,
                 "tolerance": SHOOT_TOLERANCE} for r in found]
        _write(output, lambda out: emit(rows, SHOOT_COLUMNS, s["format"], out))
    run_guarded(run)


# -- verify ------------------------------------------------------------------------

@main.command("verify")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--suite", default="all", show_default=True,
              help="all, none or comma-separated check names")
@click.option("--seed", type=int)
@click.option("--draws", type=int, help="draws for closed-form checks")
@click.option("--oracle-draws", type=int, help="draws per system for the oracle")
@click.option("--fd-draws", type=int, help="draws for grid-based checks")
@click.option("--points", type=int, help="reference grid size")
@click.option("--report", "report_path", default="verification_report.json", show_default=True,
              type=click.Path(dir_okay=False))
def cmd_verify(config_path, suite, seed, draws, oracle_draws, fd_draws, points, report_path):
    """Run the verification suite and write a JSON report."""
    def run():
        s = settings(config_path, seed=seed)
        base = report.SuiteConfig()
        overrides = {"seed": s["seed"], "draws": draws, "oracle_draws": oracle_draws,
                     "fd_draws": fd_draws, "points": points, "algebra_points": points}
        cfg = report.SuiteConfig(**{**base.__dict__, **{k: v for k, v in overrides.items()
                                                        if v is not None}})
        result = report.run_suite(suite, cfg)
        with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(result.to_json())
        for e in result.entries:
            status = "WARN" if e.warning else ("PASS" if e.passed else "FAIL")
            click.echo(f"{status} {e.check_name} [{e.system}] value={fmt(e.value)} "
                       f"tol={fmt(e.tolerance)}{'  ' + e.note if e.note else ''}")
        summ = result.summary
        click.echo(f"{summ['passed']}/{summ['total']} passed, {summ['failed']} failed, "
                   f"{summ['warnings']} warnings; report: {report_path}")
        return EXIT_OK if result.all_passed else EXIT_VERIFY
    run_guarded(run)


if __name__ == "__main__":
    main()
