"""Restriction of a signature (3,2) lift to O(3,1), computed directly and through the theta contraction."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import errors as E
from .harmonic import MultiIndexKappa, vilenkin
from .lattice import (
    EvenLattice,
    IsotropicSplit,
    Isometry,
    Tower,
    discriminant_group,
    split_at,
    standard_isometry,
)
from .lift import LiftContext, ParabolicElement, W_values, _gcd_of_dual, _support, divisor_sum_coeff
from .modform import (
    CuspFormCoeffs,
    Sublattice,
    contract_theta,
    contraction_fibers,
    descend_coeffs,
    descent_fibers,
    sublattice,
)
from .qmath import expi, frac_part, fvec, integer_kernel, matvec, smith_normal_form, solve_in_span


@dataclass
class RestrictionSetup:
    L: EvenLattice
    split: IsotropicSplit  # L at z
    K1_in_L1: Sublattice  # K1 inside L1 (L1 coordinates)
    S: Sublattice  # K inside L
    splitK: IsotropicSplit  # K at z, its L1 is K1
    v0: Isometry
    w0: Isometry
    to_K1sub: np.ndarray = field(repr=False)  # splitK-L1 coordinates -> K1_in_L1 coordinates (exact, as Fractions)

    @property
    def K(self) -> EvenLattice:
        return self.S.K

    @property
    def tower_K(self) -> Tower:
        return Tower(self.K, (self.splitK,))

    def k1_to_L1(self, lam: Sequence) -> tuple:
        """A K1 vector in splitK coordinates, written in L1 coordinates."""
        x = self.S.to_L(self.splitK.L1_to_L(fvec(lam)))
        return tuple(solve_in_span([list(r) for r in self.split.L1_basis], x))

    def embed(self, gK: ParabolicElement) -> np.ndarray:
        """Matrix on L coordinates of gK in O(K_R), acting trivially on the complement of K."""
        MK = gK.matrix(self.splitK)
        Bk = np.array(self.S.basis, dtype=float).T
        Bp = np.array(self.S.perp_basis, dtype=float).T
        full = np.hstack([Bk, Bp])
        img = np.hstack([Bk @ MK, Bp])
        return img @ np.linalg.inv(full)


def restriction_setup(L: EvenLattice, z: Sequence, z_prime: Sequence, K1_basis: Sequence[Sequence[int]]) -> RestrictionSetup:
    """K1_basis: rows in the L1 coordinates of split_at(L, z, z_prime)."""
    if (L.b_plus, L.b_minus) != (3, 2):
        raise E.BadSignature("restriction needs a lattice of signature (3,2)")
    split = split_at(L, z, z_prime)
    L1 = split.L1
    K1 = sublattice(L1, K1_basis)
    if (K1.K.b_plus, K1.K.b_minus) != (2, 0):
        raise E.ValidationError("K1 must be positive definite of rank 2")
    # K is the orthogonal complement in L of the complement of K1 in L1
    pL = split.L1_to_L(K1.perp_basis[0])
    G = [list(r) for r in L.gram]
    row = [int(x) for x in matvec(G, pL)]
    Kbasis = integer_kernel([row], L.rank)
    S = sublattice(L, Kbasis)
    zK = S.from_L(split.z)
    zpK = S.from_L(split.z_prime)
    if any(x.denominator != 1 for x in zK):
        raise E.ValidationError("z is not in K")  # pragma: no cover
    N = math.gcd(*[int(L.bil(split.z, b)) for b in S.basis])
    if N != split.N:
        raise E.ValidationError(f"(z, K) = {N}Z differs from (z, L) = {split.N}Z")
    splitK = split_at(S.K, [int(x) for x in zK], zpK)
    # isometry: (z +- z*)/sqrt2 -> e1, e5; K1 -> <e2, e3>; the complement of K1 in L1 -> e4
    r2 = math.sqrt(2.0)
    zf = np.array([float(x) for x in split.z])
    zs = np.array([float(x) for x in split.z_star])
    src = [(zf + zs) / r2, (zf - zs) / r2]
    e = np.eye(5)
    dst = [e[0], e[4]]
    SK1 = standard_isometry(K1.K).matrix
    for i, b in enumerate(K1.basis):
        src.append(np.array([float(x) for x in split.L1_to_L(b)]))
        t = np.zeros(5)
        t[1:3] = SK1[:, i]
        dst.append(t)
    src.append(np.array([float(x) for x in pL]))
    dst.append(math.sqrt(-2 * float(L.q(pL))) * e[3])
    M = np.array(dst).T @ np.linalg.inv(np.array(src).T)
    v0 = Isometry(M, 3)
    if v0.defect(L.gram) > 1e-10:
        raise E.NumericFailure("compatible isometry failed the isometry check")  # pragma: no cover
    Bk = np.array(S.basis, dtype=float).T
    w0 = Isometry((M @ Bk)[[0, 1, 2, 4], :], 3)
    if w0.defect(S.K.gram) > 1e-10:
        raise E.NumericFailure("restricted isometry failed the isometry check")  # pragma: no cover
    # change of K1 coordinates, exact
    cols = []
    for b in splitK.L1_basis:
        x = S.to_L(b)
        y = solve_in_span([list(r) for r in split.L1_basis], x)
        cols.append(tuple(solve_in_span([list(r) for r in K1.basis], y)))
    T = np.array(cols, dtype=object).T
    return RestrictionSetup(L, split, K1, S, splitK, v0, w0, T)


def default_restriction_setup() -> RestrictionSetup:
    """L = U(2) + U + A1 split at the isotropic vector of U(2), with K1 = span(e + f, g) inside L1 = U + A1."""
    from .lattice import make_lattice

    G = [[0, 2, 0, 0, 0], [2, 0, 0, 0, 0], [0, 0, 0, 1, 0], [0, 0, 1, 0, 0], [0, 0, 0, 0, 2]]
    L = make_lattice(G, "U(2)+U+A1")
    split = split_at(L, (1, 0, 0, 0, 0), (0, Fraction(1, 2), 0, 0, 0))
    rows = []
    for v in ((0, 0, 1, 1, 0), (0, 0, 0, 0, 1)):
        rows.append([int(c) for c in solve_in_span([list(r) for r in split.L1_basis], fvec(v))])
    return restriction_setup(L, split.z, split.z_prime, rows)


# ---------------------------------------------------------------------------
# the two coefficient families


def _solve_affine(B: list[list[int]], t: list[int]) -> tuple[list[int], list[int]] | None:
    """m in Z^n with B m = t: a particular solution and a kernel vector (B of full row rank, n = rows + 1)."""
    U, D, V = smith_normal_form(B)
    n = len(B[0])
    Ut = matvec(U, t)
    y = [Fraction(0)] * n
    for i in range(len(B)):
        d = D[i][i]
        if Fraction(Ut[i]) % d != 0:
            return None
        y[i] = Fraction(Ut[i]) / d
    m0 = [int(x) for x in matvec(V, y)]
    w = [V[i][n - 1] for i in range(n)]
    return m0, w


def _gamma_lifts(setup: RestrictionSetup, lam: Sequence) -> tuple[list, list]:
    """Affine description gamma(j) = G1^{-1}(m0 + j w) of the gamma in L1' restricting to lam on K1."""
    L1 = setup.split.L1
    lamL1 = setup.k1_to_L1(lam)
    t = [L1.bil(lamL1, b) for b in setup.K1_in_L1.basis]
    if any(x.denominator != 1 for x in t):
        raise E.NotInLattice("lambda is not in the dual of K1")
    sol = _solve_affine([list(b) for b in setup.K1_in_L1.basis], [int(x) for x in t])
    if sol is None:  # pragma: no cover - K1 primitive
        return [], []
    m0, w = sol
    Gi = L1.gram_inverse
    return list(matvec(Gi, m0)), list(matvec(Gi, w))


def _gammas(setup: RestrictionSetup, lam: Sequence) -> list[tuple]:
    """All gamma in L1' with gamma|K1 = lam and q(gamma) > 0."""
    L1 = setup.split.L1
    g0, gw = _gamma_lifts(setup, lam)
    A = L1.q(gw)
    Bq = L1.bil(g0, gw)
    C = L1.q(g0)
    if A >= 0:
        raise E.ValidationError("complement of K1 in L1 is not negative definite")  # pragma: no cover
    # q(g0 + j gw) = A j^2 + B j + C > 0
    disc = float(Bq * Bq - 4 * A * C)
    if disc < 0:
        return []
    c = -float(Bq) / (2 * float(A))
    h = math.sqrt(disc) / (2 * abs(float(A)))
    out = []
    for j in range(math.floor(c - h) - 1, math.ceil(c + h) + 2):
        g = tuple(a + j * b for a, b in zip(g0, gw))
        if L1.q(g) > 0:
            out.append(g)
    return out


def direct_terms(setup: RestrictionSetup, lam: Sequence, n: int, phase: int = -1, literal: bool = False) -> Counter:
    """Formal terms (n, delta + L, q(gamma)/n^2, phase mod 1) of the coefficient of lam in the restricted expansion.

    literal=True uses pi(delta) = gamma instead of gamma/n.
    """
    split = setup.split
    L = split.lattice
    D1 = split.D1
    fib = descent_fibers(split)
    out = Counter()
    for g in _gammas(setup, lam):
        gn = tuple(x / n for x in g)
        try:
            _gcd_check(split.L1, gn)
        except E.NotInLattice:
            continue
        key = D1.reduce(g if literal else gn)
        arg = split.L1.q(g) / (n * n)
        for d in fib.get(key, ()):
            out[(n, d, arg, frac_part(phase * n * L.bil(d, split.z_prime)))] += 1
    return out


def _gcd_check(L1: EvenLattice, x: Sequence):
    G = L1.gram
    for i in range(len(x)):
        if sum(Fraction(G[i][j]) * x[j] for j in range(len(x))).denominator != 1:
            raise E.NotInLattice("not in the dual")


def seesaw_terms(setup: RestrictionSetup, lam: Sequence, n: int, depth, phase: int = -1) -> Counter:
    """Formal terms of sum over eps in F'/K over K1-class lam/n of e(phase (n eps, z')) C(q(lam)/n^2, eps), C expanded."""
    sK = setup.splitK
    K = setup.K
    DK1 = sK.D1
    cf = contraction_fibers(setup.S, depth)
    fibK = descent_fibers(sK)
    key = DK1.reduce(tuple(Fraction(x) / n for x in lam))
    m = sK.L1.q(fvec(lam)) / (n * n)
    out = Counter()
    for eps in fibK.get(key, ()):
        ph = frac_part(phase * n * K.bil(eps, sK.z_prime))
        for dl, qperp, _ in cf.fibers.get(eps, ()):
            arg = m + qperp
            if arg > 0:
                out[(n, dl, arg, ph)] += 1
    return out


def lemma_i_check(setup: RestrictionSetup, lam: Sequence, literal: bool = False) -> dict:
    """Exact comparison of the two formal coefficient sums for every n dividing lam."""
    sK = setup.splitK
    lam = fvec(lam)
    q = sK.L1.q(lam)
    g = _gcd_of_dual(sK.L1, lam)
    res = {}
    for n in range(1, g + 1):
        if g % n:
            continue
        a = direct_terms(setup, lam, n, literal=literal)
        b = seesaw_terms(setup, lam, n, q / (n * n) + 1)
        res[n] = (a == b, sum(a.values()), sum(b.values()))
    return res


def _k1_key_map(setup: RestrictionSetup):
    DK1 = setup.splitK.D1
    Dsub = discriminant_group(setup.K1_in_L1.K)
    T = setup.to_K1sub

    def f(key):
        y = [sum(T[i][j] * key[j] for j in range(len(key))) for i in range(T.shape[0])]
        return Dsub.reduce(y)

    return {k: f(k) for k in DK1.coset_reps}


def lemma_ii_check(setup: RestrictionSetup, horizon) -> tuple[bool, dict, dict]:
    """Formal comparison of Theta_{L,K}(f)_{K1} and Theta_{L1,K1}(f_{L1}) up to the horizon.

    Each coefficient (lambda, m) on K1 is written as a multiset of (delta + L, argument) pairs,
    keys translated to the K1 basis inside L1.
    """
    horizon = Fraction(horizon)
    km = _k1_key_map(setup)
    Dsub = discriminant_group(setup.K1_in_L1.K)
    # contraction to K, then descent to K1
    cf = contraction_fibers(setup.S, horizon)
    a: dict = {}
    for lam, eps_list in descent_fibers(setup.splitK).items():
        for eps in eps_list:
            for dl, qperp, _ in cf.fibers.get(eps, ()):
                _collect(a, km[lam], Dsub, dl, qperp, horizon)
    # descent to L1, then contraction to K1
    cf1 = contraction_fibers(setup.K1_in_L1, horizon)
    fib = descent_fibers(setup.split)
    b: dict = {}
    for lam, items in cf1.fibers.items():
        for g, qperp, _ in items:
            for dl in fib.get(g, ()):
                _collect(b, lam, Dsub, dl, qperp, horizon)
    return a == b, a, b


def _collect(out: dict, lam, D, dl, qperp, horizon):
    m = frac_part(D.q(lam))
    if m == 0:
        m = Fraction(1)
    while m <= horizon:
        arg = m + qperp
        if arg > 0:
            out.setdefault((lam, m), Counter())[(dl, arg)] += 1
        m += 1


# ---------------------------------------------------------------------------
# values


def direct_coefficient(setup: RestrictionSetup, f: CuspFormCoeffs, lam: Sequence, k: int) -> complex:
    sK = setup.splitK
    lam = fvec(lam)
    g = _gcd_of_dual(sK.L1, lam)
    tot = 0j
    for n in range(1, g + 1):
        if g % n:
            continue
        inner = 0j
        for (_, d, arg, ph), mult in direct_terms(setup, lam, n).items():
            if arg > f.max_n:
                raise E.HorizonExceeded(f"needs c({arg}, .) beyond the horizon {f.max_n}")
            c = f.coeffs.get((d, arg), 0j)
            if c:
                inner += mult * expi(ph) * c
        tot += float(n) ** k * inner
    return tot


@dataclass
class RestrictionValue:
    direct: complex
    seesaw: complex
    difference: float
    ct_direct: complex
    ct_seesaw: complex
    nonconstant_direct: complex
    nonconstant_seesaw: complex
    terms: int
    lemma_i: bool
    lemma_ii: bool

    def to_json(self) -> dict:
        c = lambda z: [z.real, z.imag]  # noqa: E731
        return {
            "direct": c(self.direct),
            "seesaw": c(self.seesaw),
            "difference": self.difference,
            "constant_term": {"direct": c(self.ct_direct), "seesaw": c(self.ct_seesaw)},
            "nonconstant": {"direct": c(self.nonconstant_direct), "seesaw": c(self.nonconstant_seesaw)},
            "terms": self.terms,
            "lemma_i_exact": self.lemma_i,
            "lemma_ii_exact": self.lemma_ii,
        }


def restriction_value(
    f: CuspFormCoeffs,
    setup: RestrictionSetup,
    kappa: MultiIndexKappa,
    gK: ParabolicElement,
    cutoff=4,
    constant_term: str = "oracle",
    oracle_opts: dict | None = None,
) -> RestrictionValue:
    """Both computations of the restriction of the lift of f to O(K_R) at gK in the parabolic of K at z."""
    if f.lattice.gram != setup.L.gram:
        raise E.ValidationError("form and lattice disagree")
    k = kappa.k
    if kappa.n != 3:
        raise E.ValidationError("kappa must have two entries")
    f.check_weight(k)
    cutoff = Fraction(cutoff)
    if cutoff > f.max_n:
        raise E.HorizonExceeded(f"cutoff {cutoff} beyond the horizon {f.max_n}")
    gK.validate(setup.splitK)
    if f.is_zero():
        return RestrictionValue(0j, 0j, 0.0, 0j, 0j, 0j, 0j, 0, True, True)
    C = contract_theta(f, setup.S, cutoff)
    ctx = LiftContext(setup.splitK, setup.w0)
    g1 = None if gK.g1 is None else gK.g1_matrix(2)
    support, _ = _support(ctx, g1, gK.a, cutoff)
    support = [(lam, q) for lam, q in support if q <= cutoff]
    lams = [lam for lam, _ in support]
    W = np.conj(W_values(ctx, np.array([[float(x) for x in l] for l in lams]), kappa, gK)) if lams else np.zeros(0)
    nd = ns = 0j
    li = True
    for lam, w in zip(lams, W):
        ad = direct_coefficient(setup, f, lam, k)
        asw = divisor_sum_coeff(C, setup.splitK, lam, k, 3, phase=-1, fibers=ctx.fibers)
        nd += ad * w
        ns += asw * w
    for lam in lams[:8]:
        li = li and all(ok for ok, _, _ in lemma_i_check(setup, lam).values())
    l2 = lemma_ii_check(setup, cutoff)[0]
    ctd = cts = 0j
    if kappa.k == kappa.k1 and constant_term == "oracle":
        from .lattice import Isometry as _Iso
        from .oracle import make_grid, petersson_lift

        opts = dict(oracle_opts or {})
        grid = opts.get("grid") or make_grid(opts.get("y_max", 6.0), opts.get("nx", 24), opts.get("ny", 48), "gauss")
        fac = abs(gK.a) / (math.sqrt(2) * ctx.znorm)
        h = vilenkin(kappa.tail())
        g1m = gK.g1_matrix(2)
        # seesaw side: descended contraction on K1 in the coordinates of the split of K
        fa = descend_coeffs(C, setup.splitK, 0, 0)
        cts = fac * petersson_lift(fa, setup.splitK.L1, ctx.v1, g1m, h, opts.get("R", 8.0), grid, refine_check=False).value
        # direct side: contraction of f_{L1} on K1 in the basis inside L1, with g1 and w1 transported
        f1 = descend_coeffs(f, setup.split, 0, 0)
        fb = contract_theta(f1, setup.K1_in_L1, cutoff)
        T = np.array(setup.to_K1sub, dtype=float)
        Ti = np.linalg.inv(T)
        w1b = _Iso(ctx.v1.matrix @ Ti, 2)
        ctd = fac * petersson_lift(fb, setup.K1_in_L1.K, w1b, T @ g1m @ Ti, h, opts.get("R", 8.0), grid, refine_check=False).value
    elif kappa.k == kappa.k1 and constant_term != "none":
        raise E.ValidationError("constant_term must be 'oracle' or 'none'")
    direct, seesaw = ctd + nd, cts + ns
    diff = abs(direct - seesaw) / max(1.0, abs(direct))
    return RestrictionValue(direct, seesaw, diff, ctd, cts, nd, ns, len(lams), li, l2)
