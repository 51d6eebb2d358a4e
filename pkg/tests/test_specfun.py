import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from curved_dirac.specfun import (QuadratureError, gamma_fn, gauss_laguerre, gauss_legendre,
                                  hermite, integrate, laguerre, pochhammer)


@pytest.mark.parametrize("x, expected", [(1, 1), (5, 24), (0.5, 1.7724538509055160)])
def test_gamma_examples(x, expected):
    assert gamma_fn(x) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("x, n, expected", [(3.7, 0, 1), (1, 4, 24), (2.5, 3, 39.375)])
def test_pochhammer_examples(x, n, expected):
    assert pochhammer(x, n) == pytest.approx(expected, rel=1e-15)


@given(st.floats(0.1, 20), st.integers(0, 12))
def test_pochhammer_is_gamma_ratio(x, n):
    assert pochhammer(x, n) == pytest.approx(math.gamma(x + n) / math.gamma(x), rel=1e-12)


@pytest.mark.parametrize("n, a, x, expected", [(0, 3.4, 17.0, 1.0), (1, 0.5, 2.0, -0.5), (2, 1, 2, -1)])
def test_laguerre_examples(n, a, x, expected):
    assert laguerre(n, a, x) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("n, x, expected", [(0, 3.2, 1), (1, 1.5, 3.0), (3, 1, -4)])
def test_hermite_examples(n, x, expected):
    assert hermite(n, x) == pytest.approx(expected, abs=1e-14)


@given(st.integers(0, 25), st.floats(-0.9, 10), st.floats(0, 40))
def test_laguerre_matches_scipy(n, a, x):
    ref = special.eval_genlaguerre(n, a, x)
    assert laguerre(n, a, x) == pytest.approx(ref, rel=1e-9, abs=1e-9 * max(1, abs(ref)))


@given(st.integers(0, 25), st.floats(-6, 6))
def test_hermite_matches_scipy(n, x):
    ref = special.eval_hermite(n, x)
    assert hermite(n, x) == pytest.approx(ref, rel=1e-10, abs=1e-10)


def test_laguerre_orthogonality():
    rule = gauss_laguerre(60, 1.5)
    for m in range(5):
        for n in range(5):
            val = np.sum(rule.weights * laguerre(m, 1.5, rule.nodes) * laguerre(n, 1.5, rule.nodes))
            ref = math.gamma(n + 2.5) / math.factorial(n) if m == n else 0.0
            assert val == pytest.approx(ref, abs=1e-10 * max(1, ref))


def test_hermite_orthogonality():
    x, w = np.polynomial.hermite.hermgauss(60)
    for m in range(6):
        for n in range(6):
            val = np.sum(w * hermite(m, x) * hermite(n, x))
            ref = math.sqrt(math.pi) * 2 ** n * math.factorial(n) if m == n else 0.0
            assert val == pytest.approx(ref, abs=1e-9 * max(1, ref))


def test_gauss_legendre_integrates_polynomials():
    rule = gauss_legendre(8)
    assert np.sum(rule.weights * rule.nodes ** 14) == pytest.approx(2 / 15, rel=1e-14)


def test_integrate_examples():
    assert integrate(lambda x: np.ones_like(x), 0, 1, tol=1e-12) == pytest.approx(1, abs=1e-12)
    assert integrate(lambda x: np.exp(-x), 0, math.inf, tol=1e-10) == pytest.approx(1, abs=1e-10)
    assert integrate(lambda r: r ** (2 - 1), 0, 1) == pytest.approx(0.5, abs=1e-12)


def test_integrate_endpoint_singularity():
    assert integrate(lambda x: x ** -0.5, 0, 1) == pytest.approx(2, abs=1e-9)
    assert integrate(lambda x: -np.log(x), 0, 1) == pytest.approx(1, abs=1e-9)


@given(st.floats(0.2, 5), st.floats(0.3, 4))
def test_integrate_gamma_integrals(a, lam):
    got = integrate(lambda x: x ** a * np.exp(-lam * x), 0, math.inf, tol=0, rel_tol=1e-11,
                    scale=10 / lam)
    assert got == pytest.approx(math.gamma(a + 1) / lam ** (a + 1), rel=1e-9)


def test_integrate_rejects_bad_limits():
    with pytest.raises(ValueError):
        integrate(lambda x: x, -math.inf, 0)


def test_integrate_nonfinite_integrand_raises():
    with pytest.raises((QuadratureError, FloatingPointError)):
        integrate(lambda x: np.full_like(x, np.nan), 0, 1)
