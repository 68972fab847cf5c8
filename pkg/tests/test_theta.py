import itertools
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ortheta import errors as E
from ortheta.harmonic import Poly, vilenkin_basis
from ortheta.lattice import A1, U, direct_sum, discriminant_group, standard_isometry
from ortheta.theta import check_transformation, theta_coset, theta_full


def brute_theta(L, v0, gamma, tau, p=None, alpha=None, beta=None, h=8):
    """Box sum of y^{b-/2} p(v+) e(tau Q+ + conj(tau) Q- - (lam + beta/2, alpha)) for harmonic p."""
    G = np.array(L.gram, dtype=float)
    b = L.rank
    al = np.zeros(b) if alpha is None else np.asarray(alpha, float)
    be = np.zeros(b) if beta is None else np.asarray(beta, float)
    gam = np.array([float(x) for x in gamma])
    y = tau.imag
    tot = 0j
    for n in itertools.product(range(-h, h + 1), repeat=b):
        lam = np.array(n, float) + gam
        x = lam + be
        vp, vm = v0.plus(x), v0.minus(x)
        Qp, Qm = vp @ vp / 2, -(vm @ vm) / 2
        w = 1.0 if p is None else complex(p(vp))
        tot += w * np.exp(2j * np.pi * (tau * Qp + tau.conjugate() * Qm - (lam + be / 2) @ G @ al))
    return y ** ((b - L.b_plus) / 2) * tot


def test_a1_at_i_is_jacobi_theta():
    L = A1()
    v = theta_coset(L, standard_isometry(L), (0,), 1j, R=6.0)
    ref = float(mpmath.jtheta(3, 0, mpmath.exp(-2 * mpmath.pi)))
    assert v == pytest.approx(ref, rel=1e-13)
    assert ref == pytest.approx(1.0037349, abs=1e-7)


def test_zero_polynomial_gives_zero():
    L = A1()
    assert theta_coset(L, standard_isometry(L), (0,), 1j, p=Poly.const(1, 0), R=6.0) == 0


def test_U_matches_box_sum():
    L = U()
    v0 = standard_isometry(L)
    th = theta_full(L, v0, 1j, R=8.0)
    assert len(th.values) == 1
    (val,) = th.values.values()
    assert val == pytest.approx(brute_theta(L, v0, (0, 0), 1j), rel=1e-12)


def test_A1_has_two_components():
    L = A1()
    assert len(theta_full(L, standard_isometry(L), 1j).values) == 2


def test_tiny_radius_keeps_only_origin():
    L = direct_sum(U(), A1(-1))
    v0 = standard_isometry(L)
    tau = 0.2 + 1.7j
    v = theta_coset(L, v0, (0, 0, 0), tau, R=1e-6)
    assert v == pytest.approx(tau.imag ** ((L.rank - L.b_plus) / 2), rel=1e-14)


@pytest.mark.parametrize("gamma", [(0, 0, 0), (0, 0, Fraction(1, 2))])
def test_harmonic_weight_and_shifts_match_box_sum(gamma):
    L = direct_sum(U(), A1())
    v0 = standard_isometry(L)
    p = vilenkin_basis(2, 2)[1][1]
    tau = 0.3 + 0.9j
    alpha = (0.25, -0.1, 0.4)
    beta = (0.05, 0.2, -0.3)
    got = theta_coset(L, v0, gamma, tau, p=p, alpha=alpha, beta=beta, R=8.0)
    ref = brute_theta(L, v0, gamma, tau, p=p, alpha=alpha, beta=beta, h=7)
    assert abs(got - ref) < 1e-10 * max(1.0, abs(ref))


def test_alpha_shift_is_phase_recombination():
    L = U()
    v0 = standard_isometry(L)
    zp = (0, 1)
    shifted = theta_coset(L, v0, (0, 0), 1j, alpha=zp, R=8.0)
    assert shifted == pytest.approx(brute_theta(L, v0, (0, 0), 1j, alpha=zp), rel=1e-12)


def test_tail_decreases_with_radius():
    L = direct_sum(U(), A1())
    v0 = standard_isometry(L)
    tails = [theta_full(L, v0, 0.1 + 0.5j, R=R).tail for R in (3.0, 5.0, 7.0)]
    assert tails[0] > tails[1] > tails[2]


def test_not_orthogonal_rejected():
    L = U()
    with pytest.raises(E.NotInOrthogonalGroup):
        theta_full(L, standard_isometry(L), 1j, g=np.array([[2.0, 0], [0, 1.0]]))


def test_T_exact_on_A1():
    L = A1()
    r = check_transformation(L, standard_isometry(L), 1j, which="T", R=6.0)
    assert r["defect"] < 1e-12


def test_S_at_fixed_point_on_U():
    L = U()
    r = check_transformation(L, standard_isometry(L), 1j, which="S", R=8.0)
    assert r["defect"] < 1e-6


def test_S_with_tiny_radius_raises():
    L = A1()
    with pytest.raises(E.TruncationInsufficient):
        check_transformation(L, standard_isometry(L), 2j, which="S", R=1.0, tol=1e-6)


def _polys(L):
    if L.b_plus == 0:
        return [Poly.const(0, 1)]
    if L.b_plus == 1:
        return [Poly.const(1, 1), Poly.var(1, 0), Poly.var(1, 0) ** 2]
    return [p for k in (0, 1, 2) for _, p in vilenkin_basis(L.b_plus, k)]


def test_T_on_suite(suite):
    for name, L in suite.items():
        v0 = standard_isometry(L)
        for p in _polys(L):
            r = check_transformation(L, v0, (Fraction(1, 3), 1.1), p=p, which="T", R=6.0, tol=1.0)
            assert r["defect"] < 1e-12, (name, p)


@pytest.mark.slow
def test_S_on_suite(suite):
    for name, L in suite.items():
        v0 = standard_isometry(L)
        for tau in (1j, 0.5 + 1j):
            for p in _polys(L):
                r = check_transformation(L, v0, tau, p=p, which="S", R=8.0, tol=1e-6)
                assert r["defect"] < 1e-6, (name, tau, p)


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(0.6, 2.0), st.lists(st.floats(-1, 1), min_size=3, max_size=3), st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_S_with_characteristics(x, y, alpha, beta):
    L = direct_sum(U(), A1())
    r = check_transformation(L, standard_isometry(L), complex(x, y), which="S", R=8.0, tol=1e-6, alpha=alpha, beta=beta)
    assert r["defect"] < 1e-6


def test_radius_convergence():
    L = direct_sum(U(), A1())
    v0 = standard_isometry(L)
    keys = discriminant_group(L).coset_reps
    p = vilenkin_basis(2, 2)[0][1]
    vals = [theta_full(L, v0, 0.1 + 0.2j, p=p, R=R).vector(keys) for R in (4.0, 6.0, 8.0)]
    d1 = np.max(np.abs(vals[1] - vals[0]))
    d2 = np.max(np.abs(vals[2] - vals[1]))
    assert d1 > 100 * d2
