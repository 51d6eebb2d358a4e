import math

import numpy as np
import pytest
from scipy import integrate as sci_integrate
from scipy import special

from curved_dirac import fd
from curved_dirac.model import CouplingParams, SystemKind
from curved_dirac.report import independent_norm_integral
from curved_dirac.spectrum import Branch, energy
from curved_dirac.wavefunc import (NormMethod, default_grid, hydrogen_norm_integral, hydrogen_overlap,
                                   morse_overlap_integral, norm_constant, radial, sampled_norm)

H, M, L = SystemKind.HYDROGEN_TILTING, SystemKind.MORSE_TILTING, SystemKind.LINEAR_FACTORIZATION


def test_hydrogen_small_r_power_law(hydrogen_params):
    lv = energy(H, hydrogen_params, 1)
    grid = default_grid(hydrogen_params, lv, 4000)
    g1, _ = radial(hydrogen_params, lv, grid)
    decade = grid <= 10 * grid[0]
    slope = np.polyfit(np.log(grid[decade]), np.log(np.abs(g1.values[decade])), 1)[0]
    assert slope == pytest.approx(hydrogen_params.theta + 1, abs=1e-3)


def test_morse_endpoints(morse_params):
    lv = energy(M, morse_params, 0)
    grid = fd.geometric_grid(1e-12, 1.0, 400)
    f1, _ = radial(morse_params, lv, grid)
    assert math.isfinite(f1.values[-1]) and f1.variable == "rho"
    beta = math.sqrt(1 - lv.epsilon ** 2) / (morse_params.alpha * morse_params.delta)
    slope = np.polyfit(np.log(grid[:20]), np.log(np.abs(f1.values[:20])), 1)[0]
    assert slope == pytest.approx(beta, rel=1e-6)


def test_linear_ground_state_is_gaussian(linear_params):
    lv = energy(L, linear_params, 0)
    grid = default_grid(linear_params, lv, 600)
    g1, _ = radial(linear_params, lv, grid)
    logs = np.log(np.abs(g1.values))
    curvature = np.polyfit(grid, logs, 2)
    assert curvature[0] == pytest.approx(-0.5 * linear_params.nu, rel=1e-10)


def test_overlap_trivial_cases():
    assert morse_overlap_integral(0, 0, 2.0, 0.0, 0.0, 0.0, 0.0) == pytest.approx(0.5, abs=1e-10)
    assert morse_overlap_integral(0, 0, 1.0, 0.0, 0.0, 0.0, 0.0) == pytest.approx(1.0, abs=1e-10)
    assert morse_overlap_integral(0, 0, 1.0, 0.0, 0.0, 1.0, 0.0) == pytest.approx(1.0, abs=1e-10)


def test_overlap_symmetric_in_indices():
    a = morse_overlap_integral(1, 3, 1.7, 2.2, 2.2, 0.5, 3.0)
    b = morse_overlap_integral(3, 1, 1.7, 2.2, 2.2, 0.5, 3.0)
    assert a == pytest.approx(b, rel=1e-12)


@pytest.mark.parametrize("m, n, a, bi, gi, lam, mu", [(1, 2, 1.3, 2.5, 1.5, 0.7, 2.0),
                                                       (2, 2, 3.1, 0.4, 0.4, 0.0, 5.0),
                                                       (0, 3, 0.8, 1.0, 2.0, 1.5, 1.0)])
def test_overlap_brute_force(m, n, a, bi, gi, lam, mu):
    # composite Simpson in t = -ln rho on a 50k-panel fixed rule; t^lam endpoint via t = u^2
    u = np.linspace(0.0, math.sqrt(80 / a), 100001)
    t = u * u
    x = mu * np.exp(-t)
    g = (t ** lam * np.exp(-a * t - x) * special.eval_genlaguerre(m, bi, x)
         * special.eval_genlaguerre(n, gi, x) * 2 * u)
    ref = sci_integrate.simpson(g, x=u)
    assert morse_overlap_integral(m, n, a, bi, gi, lam, mu) == pytest.approx(ref, abs=1e-9)


def test_overlap_rejects_divergent():
    with pytest.raises(ValueError):
        morse_overlap_integral(0, 0, 0.0, 0, 0, 0, 1)


@pytest.mark.parametrize("n", range(4))
def test_hydrogen_normalization(hydrogen_params, n):
    lv = energy(H, hydrogen_params, n)
    nc = norm_constant(hydrogen_params, lv)
    assert nc.value ** 2 * independent_norm_integral(hydrogen_params, lv) == pytest.approx(1, abs=1e-4)
    if nc.method is NormMethod.NUMERIC:
        assert nc.flagged and "numeric" in nc.finding


@pytest.mark.parametrize("n", range(4))
def test_morse_normalization(morse_params, n):
    lv = energy(M, morse_params, n)
    nc = norm_constant(morse_params, lv)
    assert nc.value ** 2 * independent_norm_integral(morse_params, lv) == pytest.approx(1, abs=1e-4)


def test_sampled_norm_agrees():
    # with b = 0 the density vanishes at the origin, so the grid holds all the mass
    p = CouplingParams(alpha=0.2, eta=0.5, Z=1.2, b=0.0)
    lv = energy(H, p, 0)
    nc = norm_constant(p, lv)
    g1, g2 = radial(p, lv, default_grid(p, lv, 4000))
    assert nc.value ** 2 * sampled_norm(g1, g2, p) == pytest.approx(1, abs=1e-4)


def test_divergent_hydrogen_norm():
    # b != 0 adds 1/r to the measure, so Theta <= 0 leaves r^(2 Theta - 1) at the origin
    p = CouplingParams(alpha=0.2, eta=0.9, Z=0.5, b=0.3)
    assert p.theta <= 0
    with pytest.raises(ArithmeticError):
        hydrogen_norm_integral(p, energy(H, p, 0))


def test_linear_has_no_closed_form_norm(linear_params):
    with pytest.raises(ValueError):
        norm_constant(linear_params, energy(L, linear_params, 0, Branch.PLUS))


def test_orthogonality_measures():
    p = CouplingParams(alpha=0.2, eta=0.5, Z=1.2, b=0.2)
    lv = [energy(H, p, n) for n in range(3)]
    for i, j in ((0, 1), (0, 2), (1, 2)):
        assert abs(hydrogen_overlap(p, lv[i], lv[j])) < 1e-10
        # the curved-volume weight spoils orthogonality at order alpha^2 b
        assert 1e-5 < abs(hydrogen_overlap(p, lv[i], lv[j], curved=True)) < p.alpha ** 2 * p.b
    assert hydrogen_overlap(p, lv[1], lv[1], curved=True) == pytest.approx(1, abs=1e-8)
