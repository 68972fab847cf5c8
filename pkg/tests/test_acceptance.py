"""Acceptance criteria 1-11, one test each; the terminal summary prints one PASS/FAIL line per criterion."""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from ortheta.bessel import I_closed, I_quadrature, J2_closed, J2_sum, proportionality_check, sample_points
from ortheta.harmonic import MultiIndexKappa, Poly, dim_harmonic, is_harmonic, one_step_projection_check, poly_rank, project_H, random_poly, vilenkin, vilenkin_basis
from ortheta.lattice import A1, U, adapted_isometry, build_tower, check_discriminant_form, direct_sum, discriminant_group, project_pi, split_at, standard_isometry
from ortheta.lift import LiftContext, ParabolicElement, constant_term, cuspidal_exponents, lift_value, lift_value_b2, poincare_lift
from ortheta.modform import classical_poincare_coeffs, delta_coeffs, ramanujan_tau, synthetic_coeffs
from ortheta.oracle import make_grid, petersson_lift
from ortheta.restrict import default_restriction_setup, lemma_i_check, lemma_ii_check, restriction_value
from ortheta.theta import check_transformation
from ortheta.weil import rho_S, rho_T

SUITE = {
    "U": U(),
    "A1": A1(),
    "A1(-1)": A1(-1),
    "U(2)": U(2),
    "U+A1": direct_sum(U(), A1()),
    "U+U": direct_sum(U(), U()),
}
GRID = dict(y_max=6.0, nx=48, ny=96)


def _tower(L):
    tw = build_tower(L)
    return tw, adapted_isometry(L, tw)


def _rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_01_exact_algebra(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    bad = 0
    for n in range(2, 7):
        for k in range(0, 7):
            p = random_poly(n, k, rng, nterms=4)
            h = project_H(p)
            bad += (not is_harmonic(h)) + (project_H(h) != h)
            basis = vilenkin_basis(n, k)
            want = math.comb(n + k - 1, k) - (math.comb(n + k - 3, k - 2) if k >= 2 else 0)
            bad += not (len(basis) == want == dim_harmonic(n, k))
            if len(basis) <= 40:
                bad += poly_rank([q for _, q in basis]) != len(basis)
    for n in range(3, 6):
        for k in range(0, 5):
            for l in range(0, k + 1):
                for _, h in vilenkin_basis(n - 1, l):
                    bad += not one_step_projection_check(k, l, h).is_zero()
    lats = dict(SUITE)
    lats["A1+A1(-1)+U(3)"] = direct_sum(A1(), A1(-1), U(3))
    for L in lats.values():
        bad += check_discriminant_form(discriminant_group(L))
    for L, z in [(U(2), (1, 0)), (direct_sum(U(), A1()), (1, 0, 0)), (direct_sum(U(2), A1(-1)), (0, 1, 0)), (direct_sum(U(2), U(), A1()), (1, 0, 0, 0, 0))]:
        sp = split_at(L, z)
        d1 = 1 if sp.L1 is None else len(discriminant_group(sp.L1))
        bad += len(discriminant_group(L)) != d1 * sp.N**2
        for j in range(L.rank):
            e = [1 if i == j else 0 for i in range(L.rank)]
            bad += any(x.denominator != 1 for x in project_pi(sp, e))
    elapsed = time.perf_counter() - t0
    acceptance(1, f"exact algebra suite ({elapsed:.1f} s)", float(bad), 0.0, bad == 0 and elapsed < 30)


def test_criterion_02_weil_relations(acceptance):
    worst = 0.0
    for L in SUITE.values():
        D = discriminant_group(L)
        S, T = rho_S(D).matrix, rho_T(D).matrix
        I = np.eye(len(D))
        ST = S @ T
        worst = max(
            worst,
            np.max(np.abs(S @ S.conj().T - I)),
            np.max(np.abs(T @ T.conj().T - I)),
            np.max(np.abs(ST @ ST @ ST - S @ S)),
            np.max(np.abs(np.linalg.matrix_power(S, 8) - I)),
        )
    acceptance(2, "Weil representation unitarity, (ST)^3 = S^2, S^8 = 1", float(worst), 1e-12, worst < 1e-12)


def test_criterion_03_theta_transformation(acceptance):
    t0 = time.perf_counter()
    worst_T = worst_S = 0.0
    for L in SUITE.values():
        v0 = standard_isometry(L)
        if L.b_plus == 0:
            polys = [Poly.const(0, 1)]
        elif L.b_plus == 1:
            polys = [Poly.const(1, 1), Poly.var(1, 0), Poly.var(1, 0) ** 2]
        else:
            polys = [p for k in (0, 1, 2) for _, p in vilenkin_basis(L.b_plus, k)]
        for p in polys:
            worst_T = max(worst_T, check_transformation(L, v0, (Fraction(1, 3), 1.1), p=p, which="T", R=8.0, tol=1.0)["defect"])
            worst_S = max(worst_S, check_transformation(L, v0, 1j, p=p, which="S", R=8.0, tol=1e-6)["defect"])
    elapsed = time.perf_counter() - t0
    ok = worst_T < 1e-12 and worst_S < 1e-6 and elapsed < 120
    acceptance(3, f"theta T (defect {worst_T:.1e} < 1e-12) and S at tau=i, R=8 ({elapsed:.1f} s)", float(worst_S), 1e-6, ok)


@pytest.mark.slow
def test_criterion_04_fourier_expansion_b_plus_above_2(acceptance):
    L = direct_sum(U(), U(), U())
    tw, v0 = _tower(L)
    f = delta_coeffs(12, L)
    kap = MultiIndexKappa((12, 12))
    gz = ParabolicElement((0.0,) * 4, 1.0)
    e = lift_value(f, tw, kap, gz, cutoff=6)
    ov = petersson_lift(f, L, v0, gz.matrix(tw.splits[0]), vilenkin(kap), 8.0, make_grid(GRID["y_max"], GRID["nx"], GRID["ny"], "gauss"))
    acceptance(4, "lift_value vs Petersson oracle, U+U+U, Delta, kappa=(12,12)", _rel(e.value, ov.value), 1e-3)


@pytest.mark.slow
def test_criterion_05_fourier_expansion_b_plus_2(acceptance):
    L = direct_sum(U(), U())
    tw, v0 = _tower(L)
    f = delta_coeffs(30, L)
    gz = ParabolicElement((0.0, 0.0), 1.0)
    e = lift_value_b2(f, tw, 1, 12, gz, cutoff=6)
    ov = petersson_lift(f, L, v0, gz.matrix(tw.splits[0]), vilenkin(MultiIndexKappa((12,), 1)), 8.0, make_grid(GRID["y_max"], GRID["nx"], GRID["ny"], "gauss"))
    rel = _rel(e.value, ov.value)
    acceptance(5, "b+=2 expansion vs oracle, U+U, Delta; no constant term", rel, 1e-3, rel <= 1e-3 and e.constant_term == 0 and e.ct_strategy == "none")


@pytest.mark.slow
def test_criterion_06_projection_invariance(acceptance):
    L = direct_sum(U(), U())
    tw, v0 = _tower(L)
    f = delta_coeffs(30, L)
    p = Poly.var(2, 1) ** 11 * Poly.var(2, 0) + Poly.var(2, 0) ** 12
    assert not is_harmonic(p)
    g = ParabolicElement((0.21, -0.37), 0.9).matrix(tw.splits[0])
    grid = make_grid(GRID["y_max"], GRID["nx"], GRID["ny"], "gauss")
    a = petersson_lift(f, L, v0, g, p, 8.0, grid)
    b = petersson_lift(f, L, v0, g, project_H(p), 8.0, grid)
    rel = _rel(a.value, b.value)
    ok = rel <= 1e-2 and abs(a.value - b.value) <= a.error_estimate + b.error_estimate + 1e-2 * abs(b.value)
    acceptance(6, "oracle(p) vs oracle(Hp) for non-harmonic p of degree 12", rel, 1e-2, ok)


@pytest.mark.slow
def test_criterion_07_constant_term_recursion(acceptance):
    L = direct_sum(U(), U(), U())
    tw, v0 = _tower(L)
    f = delta_coeffs(12, L)
    ctx = LiftContext(tw.splits[0], v0)
    V1 = ctx.v1.matrix
    B = np.eye(4)
    B[0, 0] = B[-1, -1] = math.cosh(0.3)
    B[0, -1] = B[-1, 0] = math.sinh(0.3)
    gz = ParabolicElement((0.1, -0.2, 0.3, 0.05), 0.8, np.linalg.inv(V1) @ B @ V1)
    kap = MultiIndexKappa((12, 12))
    rec, _ = constant_term(f, tw, kap, gz, "recursive", v0, 6)
    orc, _ = constant_term(f, tw, kap, gz, "oracle", v0, 6)
    zero = lift_value(f, tw, MultiIndexKappa((12, 10)), gz, cutoff=3)
    rel = _rel(rec, orc)
    acceptance(7, "recursive vs oracle constant term; k > k1 gives exactly 0", rel, 1e-3, rel <= 1e-3 and zero.constant_term == 0)


@pytest.mark.slow
def test_criterion_08_bessel_identities(acceptance):
    kap = MultiIndexKappa((2, 2))
    quad = prop = 0.0
    for bm in (1, 2):
        pts = sample_points(3, bm, 5, np.random.default_rng(10 + bm), radius=0.4)
        for u in pts:
            quad = max(quad, abs(I_quadrature(u, kap, 3, bm).value - I_closed(u, kap, 3, bm)))
        rep = proportionality_check(pts, kap, 3, bm)
        prop = max(prop, rep["spread"], rep["deviation_from_constant"])
    rng = np.random.default_rng(5)
    j2 = 0.0
    for k, bm in ((2, 1), (4, 2), (6, 3)):
        for sign in (1, -1):
            l1 = -sign * rng.uniform(0.1, 1.0, 20)
            lm = rng.uniform(-0.08, 0.08, (20, bm - 1)) if bm > 1 else np.zeros((20, 0))
            a, b = J2_sum(l1, lm, k, sign, bm), J2_closed(l1, lm, k, sign, bm)
            j2 = max(j2, float(np.max(np.abs(a - b) / np.abs(b))))
    ok = quad <= 1e-3 and prop <= 1e-6 and j2 <= 1e-10
    acceptance(8, f"I closed vs quadrature; proportionality {prop:.1e} <= 1e-6; J2 {j2:.1e} <= 1e-10", quad, 1e-3, ok)


def test_criterion_09_restriction(acceptance):
    st = default_restriction_setup()
    ok_ii, _, _ = lemma_ii_check(st, 6)
    ctx = LiftContext(st.splitK, st.w0)
    from ortheta.lift import _support

    sup, _ = _support(ctx, None, 1.0, Fraction(3))
    bad = sum(not ok for lam, q in sup if q <= 3 for ok, _, _ in lemma_i_check(st, lam).values())
    f = synthetic_coeffs(st.L, 6 + Fraction(st.L.sig, 2), 4, seed=0)
    rv = restriction_value(f, st, MultiIndexKappa((6, 4)), ParabolicElement((0.1, -0.2), 0.9), cutoff=4, constant_term="none")
    diff = abs(rv.nonconstant_direct - rv.nonconstant_seesaw) / max(1.0, abs(rv.nonconstant_direct))
    acceptance(9, "restriction identities exact; two computations agree", diff, 1e-12, diff <= 1e-12 and bad == 0 and ok_ii)


def test_criterion_10_exponents(acceptance):
    expected_case = {(6, 1): "generic", (6, 3): "O(s,s)", (5, 2): "O(s+1,s)", (4, 2): "O(s,s)", (4, 1): "O(3,1)"}
    bad = 0
    for (b, s), case in expected_case.items():
        rep = cuspidal_exponents(b, s)
        bad += rep["case"] != case
        for row in rep["rows"]:
            r = row["r"]
            bad += Fraction(row["chi_P_Ur_exponent"]) != Fraction(-(b - r - 4) * (r + 1), 2)
            bad += [Fraction(x) for x in row["chi_r_exponents"]] != [Fraction(-(b - 2 * j - 4), 2) for j in range(r + 1)]
            bad += not row["ratio_form_consistent"]
    acceptance(10, "cuspidal exponents and case flags", float(bad), 0.0, bad == 0)


@pytest.mark.slow
def test_criterion_11_poincare_lift(acceptance):
    L = direct_sum(U(), U(), U())
    v0 = standard_isometry(L)
    rng = np.random.default_rng(3)
    mism = 0
    for _ in range(5):
        p = random_poly(3, 4, rng)
        a = poincare_lift(L, v0, 1, (0,) * 6, p, B=3.0)
        b = poincare_lift(L, v0, 1, (0,) * 6, project_H(p), B=3.0)
        mism += not np.array_equal(a.terms, b.terms)
    P = classical_poincare_coeffs(12, 1, 5)
    tau = ramanujan_tau(5)
    (g,) = P.form.D.coset_reps
    c1 = P.form.c(1, g)
    worst = max(abs(P.form.c(n, g) / c1 - tau[n] / tau[1]) / abs(tau[n] / tau[1]) for n in range(1, 6))
    acceptance(11, "Poincare lift p vs Hp termwise; c(n)/c(1) = tau(n)", worst, 1e-4, worst <= 1e-4 and mism == 0)
