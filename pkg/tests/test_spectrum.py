import math

import pytest
from hypothesis import assume, given, strategies as st

from curved_dirac.model import CouplingParams, SystemKind, validate
from curved_dirac.spectrum import (LINEAR_K, BracketError, Branch, NoBoundStateError, all_levels,
                                   bargmann_index, energy, energy_hydrogen, energy_linear,
                                   energy_morse, morse_n_max, quantization_residual,
                                   solve_quantization)

H, HF = SystemKind.HYDROGEN_TILTING, SystemKind.HYDROGEN_FACTORIZATION
M, MF = SystemKind.MORSE_TILTING, SystemKind.MORSE_FACTORIZATION
L = SystemKind.LINEAR_FACTORIZATION
ALPHA_FS = 1 / 137.035999

# 50-digit roots of the hydrogen condition -(b + eps Z)/beta = k + n (mpmath findroot)
HYDROGEN_REF = {
    0.0: [-0.99997337538604999169, -0.9999933436471379254,
          -0.99999704160454011196, -0.99999833589932305217],
    0.05: [-0.9999759537095746673, -0.9999939904470224477,
           -0.99999732939812414416, -0.99999849787498573212],
}
# 50-digit roots of the Morse tilting condition at alpha=0.2, delta=1, a=1, b=0.3, eta=pi/3
MORSE_REF = [0.54048963629081681184, 0.58043250387510651357, 0.6197971073251218967]


def test_bargmann_examples():
    p = CouplingParams(alpha=0.1, eta=math.pi / 4, Z=1, b=0)
    assert bargmann_index(L, CouplingParams(alpha=0.3, eta=1.0, a=0.2, b=1.0)) == 0.25
    assert bargmann_index(H, p) == pytest.approx(1.0, abs=1e-15)
    q = CouplingParams(alpha=0.5, eta=0.6, a=1, b=0.3, delta=2)
    assert bargmann_index(M, q, 0.0) == pytest.approx(1.5, abs=1e-15)


def test_no_binding_without_coupling():
    with pytest.raises(NoBoundStateError):
        energy_hydrogen(CouplingParams(alpha=0.1, eta=math.pi / 4, Z=0, b=0), 0)


@pytest.mark.parametrize("b", sorted(HYDROGEN_REF))
@pytest.mark.parametrize("n", range(4))
def test_hydrogen_against_high_precision_root(b, n):
    p = CouplingParams(alpha=ALPHA_FS, eta=math.pi / 4, Z=1, b=b)
    assert energy_hydrogen(p, n).epsilon == pytest.approx(HYDROGEN_REF[b][n], abs=1e-12)


@pytest.mark.parametrize("n", range(3))
def test_morse_against_high_precision_root(morse_params, n):
    assert energy_morse(morse_params, n).epsilon == pytest.approx(MORSE_REF[n], abs=1e-12)


def test_morse_above_n_max_reports_it(morse_params):
    n_max = morse_n_max(morse_params)
    assert n_max == 14
    with pytest.raises(NoBoundStateError, match="n_max=14"):
        energy_morse(morse_params, n_max + 1)


def test_residual_small_at_closed_form():
    p = CouplingParams(alpha=ALPHA_FS, eta=math.pi / 4, Z=1, b=0.05)
    # beyond n = 3 one ulp of eps already moves the residual by more than 1e-10
    for n in range(4):
        lv = energy(H, p, n)
        assert abs(quantization_residual(H, p, n, lv.epsilon)) < 1e-10


def test_residual_brackets_the_level():
    p = CouplingParams(alpha=ALPHA_FS, eta=math.pi / 4, Z=1, b=0.05)
    lv = energy(H, p, 0)
    inner = quantization_residual(H, p, 0, 0.5 * lv.epsilon)
    edge = quantization_residual(H, p, 0, -1 + 1e-12)
    assert inner != 0 and (inner > 0) != (edge > 0)


def test_solve_quantization_matches_closed_form(morse_params):
    p = CouplingParams(alpha=ALPHA_FS, eta=math.pi / 4, Z=1, b=0.05)
    lv = energy(H, p, 0)
    assert solve_quantization(H, p, 0, (-1 + 1e-12, 0)) == pytest.approx(lv.epsilon, abs=1e-12)
    lm = energy(M, morse_params, 1)
    assert solve_quantization(M, morse_params, 1, (0.55, 0.6)) == pytest.approx(lm.epsilon, abs=1e-12)


def test_degenerate_bracket():
    p = CouplingParams(alpha=0.1, eta=0.6)
    with pytest.raises(BracketError):
        solve_quantization(H, p, 0, (-0.5, -0.5))


hydrogen_draws = st.builds(CouplingParams, alpha=st.floats(0.01, 0.5), eta=st.floats(0.2, 1.35),
                           Z=st.floats(0.1, 3), b=st.floats(-0.5, 0.5))
morse_draws = st.builds(CouplingParams, alpha=st.floats(0.05, 0.5), eta=st.floats(0.2, 1.35),
                        a=st.floats(0.2, 2), b=st.floats(-0.5, 0.5), delta=st.floats(0.5, 2))
linear_draws = st.builds(CouplingParams, alpha=st.floats(0.05, 0.5), eta=st.floats(0.2, 1.35),
                         a=st.floats(-1, 1), b=st.floats(0.1, 2))


def residual_floor(system, p, n, eps, k=0.25):
    """Residual change from a two-ulp move of eps; 1e-10 is unreachable below it."""
    step = 2 * math.ulp(eps)
    slope = abs(quantization_residual(system, p, n, eps + step, k)
                - quantization_residual(system, p, n, eps - step, k)) / 2
    return max(1e-10, slope)


@given(hydrogen_draws, st.integers(0, 5))
def test_hydrogen_methods_agree(p, n):
    assume(not validate(p, H))
    a, b = all_levels(H, p, [n]), all_levels(HF, p, [n])
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert x.epsilon == pytest.approx(y.epsilon, rel=1e-12)
        assert abs(quantization_residual(H, p, n, x.epsilon)) <= residual_floor(H, p, n, x.epsilon)


def test_residual_floor_case():
    # 1 + eps ~ 2e-7: one ulp of eps moves the residual by ~3e-10
    p = CouplingParams(alpha=0.01, eta=0.25, Z=0.25, b=0.1875)
    lv = energy(H, p, 0)
    floor = residual_floor(H, p, 0, lv.epsilon)
    assert floor > 1e-10
    assert abs(quantization_residual(H, p, 0, lv.epsilon)) <= floor


@given(morse_draws, st.integers(0, 5))
def test_morse_methods_agree(p, n):
    assume(not validate(p, M))
    a, b = all_levels(M, p, [n]), all_levels(MF, p, [n])
    assert [x.branch for x in a] == [y.branch for y in b]
    for x, y in zip(a, b):
        assert x.epsilon == pytest.approx(y.epsilon, rel=1e-12)
        assert abs(quantization_residual(M, p, n, x.epsilon)) <= residual_floor(M, p, n, x.epsilon)


@given(linear_draws, st.integers(0, 5), st.sampled_from(LINEAR_K))
def test_linear_residual(p, n, k):
    assume(not validate(p, L))
    for lv in all_levels(L, p, [n], [k]):
        assert lv.k == k
        assert abs(quantization_residual(L, p, n, lv.epsilon, k)) < 1e-10


def test_linear_branches(linear_params):
    plus = energy_linear(linear_params, 0, Branch.PLUS)
    minus = energy_linear(linear_params, 0, Branch.MINUS)
    assert plus.epsilon > minus.epsilon


def test_b_continuity_is_monotone():
    def eps(b):
        return energy(H, CouplingParams(alpha=0.1, eta=0.6, Z=1, b=b), 1).epsilon
    gaps = [abs(eps(b) - eps(0.0)) for b in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)]
    assert all(x > y for x, y in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-8


@pytest.mark.parametrize("alpha", [1e-2, 5e-3, 1e-3])
@pytest.mark.parametrize("n", range(4))
def test_nonrelativistic_limit(alpha, n):
    p = CouplingParams(alpha=alpha, eta=math.pi / 4, Z=1, b=0)
    binding = 1 - abs(energy(H, p, n).epsilon)
    assert binding == pytest.approx(alpha ** 2 / (2 * (n + 1) ** 2), rel=0.01)
