import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ortheta import errors as E
from ortheta.lattice import A1, U, direct_sum, discriminant_group, split_at
from ortheta.modform import (
    classical_poincare_coeffs,
    coeffs_from_json,
    contract_theta,
    delta_coeffs,
    descend_coeffs,
    kloosterman,
    load_coeffs,
    ramanujan_tau,
    sublattice,
    synthetic_coeffs,
)
from ortheta.qmath import frac_part

UUU = direct_sum(U(), U(), U())


def tau_from_product(N):
    """q prod (1 - q^m)^24 by repeated polynomial multiplication with numpy integers."""
    poly = np.zeros(N + 1, dtype=object)
    poly[0] = 1
    for m in range(1, N + 1):
        for _ in range(24):
            shifted = np.zeros_like(poly)
            shifted[m:] = poly[: N + 1 - m]
            poly = poly - shifted
    return [0] + list(poly[:N])


def test_ramanujan_tau_against_product():
    assert ramanujan_tau(20) == tau_from_product(20)


def test_delta_examples():
    f = delta_coeffs(3)
    (g,) = f.D.coset_reps
    assert [f.c(n, g) for n in (1, 2, 3)] == [1, -24, 252]
    assert f.weight == 12 + Fraction(UUU.sig, 2)


def _delta_json(rows):
    return {"weight": "12/1", "coeffs": rows}


def test_load_delta_json(tmp_path):
    rows = [{"gamma": ["0/1"] * 6, "n": "1/1", "c": [1.0, 0.0]}, {"gamma": ["0/1"] * 6, "n": "2/1", "c": [-24.0, 0.0]}]
    path = tmp_path / "delta.json"
    path.write_text(json.dumps(_delta_json(rows)))
    f = load_coeffs(str(path), UUU, k=12)
    assert f.weight == 12
    assert f.c(2, f.D.zero) == -24


def test_n_zero_rejected():
    with pytest.raises(E.SupportViolation):
        coeffs_from_json(_delta_json([{"gamma": ["0/1"] * 6, "n": "0/1", "c": [1.0, 0.0]}]), UUU)


def test_off_support_rejected():
    L = A1()
    with pytest.raises(E.SupportViolation):
        coeffs_from_json({"weight": "5/2", "coeffs": [{"gamma": ["1/2"], "n": "1/1", "c": [1.0, 0.0]}]}, L)
    f = coeffs_from_json({"weight": "5/2", "coeffs": [{"gamma": ["1/2"], "n": "5/4", "c": [1.0, 0.0]}]}, L)
    assert f.c(Fraction(5, 4), (Fraction(1, 2),)) == 1


def test_weight_mismatch_and_parse_errors(tmp_path):
    with pytest.raises(E.WeightMismatch):
        coeffs_from_json(_delta_json([]), UUU, k=10)
    with pytest.raises(E.ParseError):
        coeffs_from_json({"coeffs": []}, UUU)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(E.ParseError):
        load_coeffs(str(bad), UUU)


def test_json_roundtrip():
    L = direct_sum(U(), A1())
    f = synthetic_coeffs(L, Fraction(5, 2), 4, seed=3)
    g = coeffs_from_json(json.loads(json.dumps(f.to_json())), L)
    assert g.coeffs == f.coeffs and g.max_n == f.max_n


def test_horizon_enforced():
    f = delta_coeffs(5)
    with pytest.raises(E.HorizonExceeded):
        f.c(6, f.D.zero)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 3), st.integers(1, 6))
def test_synthetic_support(seed, max_n):
    L = direct_sum(U(2), A1())
    f = synthetic_coeffs(L, Fraction(7, 2), max_n, seed=seed)
    D = discriminant_group(L)
    for g, n in f.coeffs:
        assert n > 0 and frac_part(n - D.q(g)) == 0 and n <= max_n
    f.validate()


def test_kloosterman_small_values():
    assert kloosterman(1, 1, 2) == pytest.approx(1)
    assert kloosterman(1, 1, 1) == pytest.approx(1)
    # S(1,1;3) = e(2/3) + e(4/3) = -1
    assert kloosterman(1, 1, 3) == pytest.approx(-1)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(1, 40))
def test_kloosterman_symmetry_and_weil_bound(m, n, c):
    s = kloosterman(m, n, c)
    assert abs(s.imag) < 1e-9
    assert s == pytest.approx(kloosterman(n, m, c), abs=1e-9)
    divisors = sum(1 for d in range(1, c + 1) if c % d == 0)
    assert abs(s) <= divisors * math.sqrt(math.gcd(m, n, c)) * math.sqrt(c) + 1e-9


def test_poincare_proportional_to_delta():
    P = classical_poincare_coeffs(12, 1, 5)
    tau = ramanujan_tau(5)
    (g,) = P.form.D.coset_reps
    c1 = P.form.c(1, g)
    for n in range(2, 6):
        assert P.form.c(n, g) / c1 == pytest.approx(tau[n], rel=1e-4)
    assert P.tail < 1e-6


def test_poincare_preconditions():
    with pytest.raises(E.NotEven):
        classical_poincare_coeffs(11, 1, 3)
    with pytest.raises(E.NontrivialDiscriminant):
        classical_poincare_coeffs(12, 1, 3, L=direct_sum(U(), A1()))


def test_descent_trivial_discriminant():
    f = delta_coeffs(6)
    sp = split_at(UUU, (1, 0, 0, 0, 0, 0))
    g = descend_coeffs(f, sp, 0, 0)
    (z1,) = g.D.coset_reps
    for n in range(1, 7):
        assert g.c(n, z1) == f.c(n, f.D.zero)
    h = descend_coeffs(f, sp, 1, 0)
    assert h.coeffs == g.coeffs


def test_descent_sums_fibers_U_plus_A1():
    L = direct_sum(U(), A1())
    sp = split_at(L, (1, 0, 0))
    assert len(sp.M_prime_reps) == discriminant_group(L).order * sp.N == 2
    f = synthetic_coeffs(L, Fraction(5, 2), 4, seed=1)
    g = descend_coeffs(f, sp, 0, 0)
    # L1 = A1 here, and pi is a bijection on the two classes
    assert sp.L1.gram == ((2,),)
    for (gam, n), c in f.coeffs.items():
        assert g.c(n, g.D.reduce((gam[2],))) == pytest.approx(c)


def test_contraction_identity_for_K_equal_L():
    L = direct_sum(U(), A1())
    f = synthetic_coeffs(L, Fraction(5, 2), 5, seed=2)
    S = sublattice(L, [(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    C = contract_theta(f, S)
    assert C.coeffs == {k: v for k, v in f.coeffs.items() if v != 0}
    assert C.weight == f.weight


def test_contraction_positive_rank_one_complement():
    L = direct_sum(U(), A1())
    f = synthetic_coeffs(L, Fraction(5, 2), 6, seed=4)
    S = sublattice(L, [(1, 0, 0), (0, 1, 0)])
    C = contract_theta(f, S, horizon=3)
    zero = (Fraction(0),) * 3
    half = (Fraction(0), Fraction(0), Fraction(1, 2))
    for m in range(1, 4):
        # mu = j/2 times the dual generator of A1: q(mu_perp) = j^2/4, coset j mod 2
        ref = sum(f.coeffs.get((half if j % 2 else zero, m + Fraction(j * j, 4)), 0) for j in range(-6, 7) if m + Fraction(j * j, 4) <= 6)
        assert C.c(m, C.D.zero) == pytest.approx(ref, abs=1e-12)
    assert C.weight == Fraction(2)
    assert not C.complete


def test_contraction_horizon_and_primitivity():
    L = direct_sum(U(), A1())
    f = synthetic_coeffs(L, Fraction(5, 2), 3, seed=0)
    with pytest.raises(E.HorizonExceeded):
        contract_theta(f, sublattice(L, [(1, 0, 0), (0, 1, 0)]), horizon=4)
    with pytest.raises(E.NotPrimitive):
        sublattice(L, [(2, 0, 0), (0, 1, 0)])


def test_descent_support_on_nontrivial_forms():
    for i, (L, z) in enumerate([(direct_sum(U(2), A1()), (1, 0, 0)), (direct_sum(U(), U(2), A1(-1)), (0, 0, 1, 0, 0))]):
        f = synthetic_coeffs(L, Fraction(L.sig, 2) + 2, 4, seed=i)
        descend_coeffs(f, split_at(L, z), 0, 0).validate()
