import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ortheta import errors as E
from ortheta.special import (
    appell_F4,
    bessel_J,
    bessel_J_integral,
    bessel_J_series,
    bessel_K,
    bessel_K_integral,
    f4_reduction_residual,
    gauss_2F1,
    kv_half,
)


def test_K_examples():
    assert abs(float(bessel_K(0.5, 1.0)) - 0.461068504447894) < 1e-14
    assert abs(float(bessel_K(0, 1.0)) - 0.42102443824070834) < 1e-14
    x = 40.0
    assert abs(float(bessel_K(2, x)) / (math.sqrt(math.pi / (2 * x)) * math.exp(-x)) - 1) < 0.05
    with pytest.raises(E.DomainError):
        bessel_K(1, 0.0)


def test_J_examples():
    assert float(bessel_J(0, 0.0)) == 1.0
    assert abs(float(bessel_J(0.5, math.pi))) < 1e-12
    assert abs(float(bessel_J(1, 1.0)) - 0.44005058574493355) < 1e-14


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 12), st.floats(1e-3, 50))
def test_K_matches_mpmath(nu, x):
    want = float(mpmath.besselk(nu, x))
    assert abs(float(bessel_K(nu, x)) - want) <= 1e-10 * abs(want)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 12), st.floats(0, 50))
def test_J_matches_mpmath(nu, x):
    want = float(mpmath.besselj(nu, x))
    assert abs(float(bessel_J(nu, x)) - want) <= 1e-9 * max(abs(want), 1e-3)


def test_integral_representations_agree(rng):
    for _ in range(20):
        nu, x = rng.uniform(0, 8), rng.uniform(0.2, 25)
        assert abs(bessel_K_integral(nu, x) / float(bessel_K(nu, x)) - 1) < 1e-7
        n, xj = int(rng.integers(0, 8)), rng.uniform(0.1, 12)
        assert abs(bessel_J_integral(n, xj) - float(bessel_J(n, xj))) < 1e-7 * max(1.0, abs(float(bessel_J(n, xj))))
        assert abs(bessel_J_series(nu, xj) - float(bessel_J(nu, xj))) < 1e-7 * max(1.0, abs(float(bessel_J(nu, xj))))


@pytest.mark.parametrize("n", range(0, 10))
def test_half_integer_closed_forms(n):
    x = np.linspace(0.01, 45, 200)
    want = np.array([float(mpmath.besselk(n + 0.5, t)) for t in x])
    assert np.max(np.abs(kv_half(n, x) / want - 1)) < 1e-10


def test_2F1_examples():
    assert float(gauss_2F1(1.3, 2.1, 0.7, 0.0)) == 1.0
    assert abs(float(gauss_2F1(1, 1, 2, 0.5)) - 1.3862943611198906) < 1e-12
    a, b, c, z = 2, 3, 4, -0.7
    lhs = float(gauss_2F1(a, b, c, z))
    rhs = (1 - z) ** (-a) * float(gauss_2F1(a, c - b, c, z / (z - 1)))
    assert abs(lhs - rhs) < 1e-9 * abs(lhs)
    with pytest.raises(E.PoleAtC):
        gauss_2F1(1, 1, -2, 0.3)
    with pytest.raises(E.DivergentRegion):
        gauss_2F1(1, 1, 2, 1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 6), st.floats(-3, 6), st.floats(0.3, 7), st.floats(-5, 0.95))
def test_2F1_matches_mpmath(a, b, c, z):
    want = float(mpmath.hyp2f1(a, b, c, z))
    got = gauss_2F1(a, b, c, z)
    assert abs(float(got) - want) <= 1e-9 * max(1.0, abs(want))


def test_F4_examples():
    assert float(appell_F4(1.2, 2.3, 3.1, 4.7, 0, 0)) == 1.0
    assert abs(float(appell_F4(1, 2, 3, 4, 0.1, 0)) - float(gauss_2F1(1, 2, 3, 0.1))) < 1e-9
    with pytest.raises(E.OutsideDomain):
        appell_F4(1, 2, 3, 4, 0.5, 0.5)


def _f4_mpmath(a, b, c, d, x, y, N=80):
    s = mpmath.mpf(0)
    for m in range(N):
        for n in range(N - m):
            s += mpmath.rf(a, m + n) * mpmath.rf(b, m + n) / (mpmath.rf(c, m) * mpmath.rf(d, n) * mpmath.factorial(m) * mpmath.factorial(n)) * mpmath.mpf(x) ** m * mpmath.mpf(y) ** n
    return float(s)


@pytest.mark.parametrize("args", [(1.5, 2.0, 2.5, 1.5, -0.1, -0.05), (3, 2.5, 1.5, 2.5, -0.2, -0.01), (4.0, 3.5, 2.5, 1.0, -0.05, -0.15)])
def test_F4_against_direct_double_series(args):
    assert abs(float(appell_F4(*args)) / _f4_mpmath(*args) - 1) < 1e-9


def test_F4_reduction_residual():
    for p, q in ((0.1, 0.2), (0.3, 0.05), (0.2, 0.2)):
        assert f4_reduction_residual(p, q, 0.3, 0.2) < 1e-7


@pytest.mark.parametrize("nu,x", [(0.5, 5e-324), (0.03125, 5e-324), (3.7, 1e-160), (0.0, 1e-200)])
def test_J_tiny_argument(nu, x):
    want = float(mpmath.besselj(nu, x))
    assert float(bessel_J(nu, x)) == pytest.approx(want, rel=1e-12, abs=1e-300)


def test_K_subnormal_order():
    assert float(bessel_K(5e-324, 1.0)) == pytest.approx(float(mpmath.besselk(0, 1)), rel=1e-14)
