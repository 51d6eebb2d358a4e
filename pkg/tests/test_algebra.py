import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy import sparse

from curved_dirac import fd
from curved_dirac.algebra import (Family, GeneratorTriple, GridOperator, UnderResolvedGridWarning,
                                  basis_function, build_generators, casimir_residual,
                                  commutator_residual, commutator_residuals, conjugation_residual,
                                  decay_length, family_eigenfunction, family_grid,
                                  ladder_action_check, tilt, tilting_identity_residual,
                                  trimmed_norm, zero_residual)
from curved_dirac.model import CouplingParams, SystemKind, validate
from curved_dirac.radial import RadialFunction
from curved_dirac.spectrum import all_levels, energy

PARAMS = {
    "hydrogen": CouplingParams(alpha=0.2, eta=0.7, Z=1.2, b=0.2),
    "morse": CouplingParams(alpha=0.2, eta=math.pi / 3, a=1.0, b=0.3),
    "linear": CouplingParams(alpha=0.3, eta=math.pi / 3, a=0.2, b=1.0),
}


def _setup(family, n_max=4, points=2000):
    p = PARAMS[family.system.potential]
    lv = all_levels(family.system, p, [0])[0]
    g = family_grid(family, p, lv.epsilon, n_max, points, lv.k if family is Family.J_LS else 0.25)
    t = build_generators(family, p, lv.epsilon, g, lv.k if family is Family.J_LS else 0.25)
    return p, lv, g, t


def _test_function(family, p, eps, g):
    length = decay_length(family, p, eps)
    if family is Family.J_LS:
        return (g * g + g) * np.exp(-(g / length) ** 2 / 4)
    return (g / length) ** 2 * np.exp(-g / length)


def test_dilation_generator_on_r():
    p = PARAMS["hydrogen"]
    g = fd.uniform_grid(0.5, 10, 400)
    _, _, a = build_generators(Family.B_HT, p, -0.98, g).cartesian
    assert np.allclose(a(g)[4:-4], g[4:-4], rtol=1e-12)


def test_operators_are_banded():
    _, _, _, t = _setup(Family.K_MS)
    assert t.zero.bandwidth <= 5 and t.plus.bandwidth <= 5


def test_operator_grid_mismatch():
    _, _, g, t = _setup(Family.B_HT)
    with pytest.raises(ValueError):
        t.zero(np.ones(g.size + 1))


def test_identity_triple_metric():
    g = fd.uniform_grid(1.0, 20.0, 300)
    eye = GridOperator(sparse.identity(g.size, format="csr"), g, "I")
    t = GeneratorTriple(eye, eye, eye, Family.R_HS, 1.0, np.ones_like(g))
    res = commutator_residuals(t, [np.exp(-g / 3)])
    assert res["[J0,J+]-J+"] == pytest.approx(1.0, rel=1e-12)
    assert res["[J0,J-]+J-"] == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("family", list(Family))
def test_commutators_on_smooth_function(family):
    p, lv, g, t = _setup(family, points=4000)
    f = _test_function(family, p, lv.epsilon, g)
    assert commutator_residual(t, [f]) < 1e-5


@pytest.mark.parametrize("family", list(Family))
@pytest.mark.filterwarnings("ignore::curved_dirac.algebra.UnderResolvedGridWarning")
def test_commutators_converge_at_fourth_order(family):
    res = []
    for pts in (1000, 2000):
        p, lv, g, t = _setup(family, points=pts)
        res.append(commutator_residual(t, [_test_function(family, p, lv.epsilon, g)]))
    assert math.log2(res[0] / res[1]) == pytest.approx(4.0, abs=0.5)


def test_linear_casimir():
    p, lv, g, t = _setup(Family.J_LS)
    assert t.k * (t.k - 1) == -3 / 16
    ef = family_eigenfunction(Family.J_LS, p, lv, g)
    assert casimir_residual(t, ef) < 1e-4


def test_b_family_casimir_vanishes():
    p = CouplingParams(alpha=0.1, eta=math.pi / 4, Z=1.0, b=0.0)
    lv = energy(SystemKind.HYDROGEN_TILTING, p, 1)
    g = family_grid(Family.B_HT, p, lv.epsilon, 1, 2000)
    t = build_generators(Family.B_HT, p, lv.epsilon, g)
    assert t.k * (t.k - 1) == pytest.approx(0.0, abs=1e-14)
    ef = family_eigenfunction(Family.B_HT, p, lv, g)
    cas = t.casimir(ef.values)
    sl = slice(4, -4)
    assert trimmed_norm(cas, g, t.measure) / trimmed_norm(ef.values, g, t.measure) < 1e-4
    assert np.max(np.abs(cas[sl])) < 1e-4 * np.max(np.abs(ef.values))


@settings(max_examples=5)
@given(st.floats(0.05, 0.4), st.floats(0.3, 1.2), st.floats(0.3, 2.0), st.floats(-0.4, 0.4),
       st.floats(0.6, 1.5))
def test_k_family_casimir(alpha, eta, a, b, delta):
    p = CouplingParams(alpha=alpha, eta=eta, a=a, b=b, delta=delta)
    assume(not validate(p, SystemKind.MORSE_FACTORIZATION))
    levels = all_levels(SystemKind.MORSE_FACTORIZATION, p, [0])
    assume(levels)
    lv = levels[0]
    g = family_grid(Family.K_MS, p, lv.epsilon, 0, 4000)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnderResolvedGridWarning)
        t = build_generators(Family.K_MS, p, lv.epsilon, g)
    assert casimir_residual(t, family_eigenfunction(Family.K_MS, p, lv, g)) < 1e-5


def test_hydrogen_eigenfunction_is_r0_eigenvector():
    p = PARAMS["hydrogen"]
    for lv in all_levels(SystemKind.HYDROGEN_FACTORIZATION, p, range(3)):
        g = family_grid(Family.R_HS, p, lv.epsilon, lv.n, 4000)
        t = build_generators(Family.R_HS, p, lv.epsilon, g)
        assert zero_residual(t, family_eigenfunction(Family.R_HS, p, lv, g), lv.n) < 1e-6


def test_lowering_annihilates_ground_state():
    for family in Family:
        p, lv, g, t = _setup(family)
        f0 = basis_function(family, p, lv.epsilon, 0, g, t.k if family is Family.J_LS else 0.25)
        image = t.minus(f0.values)
        assert trimmed_norm(image, g, t.measure) / trimmed_norm(f0.values, g, t.measure) < 1e-6


def test_linear_raising_coefficient():
    p, lv, g, t = _setup(Family.J_LS)
    f0, f1 = (basis_function(Family.J_LS, p, lv.epsilon, n, g, 0.25) for n in (0, 1))
    coeff = abs(fd.integrate_samples(g, f1.values * t.plus(f0.values)))
    assert coeff == pytest.approx(math.sqrt(1 * 2 * 0.25), rel=1e-6)


def test_r_family_ladder():
    p, lv, g, t = _setup(Family.R_HS)
    basis = [basis_function(Family.R_HS, p, lv.epsilon, n, g) for n in range(4)]
    assert ladder_action_check(t, t.k, 1, basis) < 1e-4


def test_coarse_grid_warns():
    p = PARAMS["hydrogen"]
    lv = energy(SystemKind.HYDROGEN_TILTING, p, 0)
    g = fd.uniform_grid(0.1, 400, 50)
    with pytest.warns(UnderResolvedGridWarning):
        build_generators(Family.B_HT, p, lv.epsilon, g)


def test_tilt_zero_is_identity():
    g = fd.geometric_grid(1e-3, 10, 100)
    f = RadialFunction(g, np.exp(-g))
    assert np.array_equal(tilt(0.0, f).values, f.values)


def test_tilt_round_trip():
    g = fd.geometric_grid(1e-3, 100, 3000)
    f = RadialFunction(g, g ** 2 * np.exp(-g))
    inner = fd.geometric_grid(1e-2, 10, 500)
    back = tilt(-0.7, tilt(0.7, f, fd.geometric_grid(3e-3, 50, 3000)), inner)
    ref = inner ** 2 * np.exp(-inner)
    assert np.max(np.abs(back.values - ref)) < 1e-8


def test_tilt_outside_range():
    g = fd.geometric_grid(1.0, 10, 50)
    with pytest.raises(ValueError):
        tilt(3.0, RadialFunction(g, np.exp(-g)))


def test_tilt_conjugates_boosts():
    p = PARAMS["hydrogen"]
    g = fd.geometric_grid(1e-3, 200, 4000)
    f = RadialFunction(g, g ** 2 * np.exp(-g))
    for sign in (1, -1):
        assert conjugation_residual(p, 0.4, f, sign) < 1e-4


@pytest.mark.parametrize("n", range(3))
def test_tilting_identity(n):
    p = PARAMS["hydrogen"]
    assert tilting_identity_residual(p, energy(SystemKind.HYDROGEN_TILTING, p, n)) < 1e-4
