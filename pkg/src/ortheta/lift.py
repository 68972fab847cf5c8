"""Fourier expansions of theta lifts along a maximal parabolic, Poincare-series lifts and cuspidal exponents."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import errors as E
from .harmonic import MultiIndexKappa, Poly, poch, project_H, vilenkin
from .lattice import (
    EvenLattice,
    IsotropicSplit,
    Isometry,
    Tower,
    adapted_isometry,
    enumerate_coset,
    enumerate_hyperboloid,
    is_orthogonal,
    m_z_matrix,
    n_z_matrix,
)
from .modform import CuspFormCoeffs, descend_coeffs, descent_fibers
from .qmath import expi, fvec
from .special import kv

# K_nu(x) < e^{-x}-ish; terms with x beyond this are dropped
_K_CUTOFF = 42.0


@dataclass(frozen=True)
class ParabolicElement:
    """g_z = n_z(u) m_z(a, g1), with u in L1 coordinates and g1 acting on L1 coordinates."""

    u: tuple
    a: float
    g1: np.ndarray | None = None

    def g1_matrix(self, r: int) -> np.ndarray:
        return np.eye(r) if self.g1 is None else np.asarray(self.g1, dtype=float)

    def validate(self, split: IsotropicSplit) -> "ParabolicElement":
        r = len(split.L1_basis)
        if len(self.u) != r:
            raise E.ValidationError(f"u must have {r} coordinates")
        if self.a == 0:
            raise E.ValidationError("a must be nonzero")
        if split.L1 is not None and not is_orthogonal(split.L1.gram, self.g1_matrix(r)):
            raise E.NotInOrthogonalGroup("g1 does not preserve the Gram matrix of L1")
        return self

    def matrix(self, split: IsotropicSplit) -> np.ndarray:
        self.validate(split)
        return n_z_matrix(split, self.u) @ m_z_matrix(split, self.a, self.g1_matrix(len(split.L1_basis)))

    @staticmethod
    def parse(s: str, r: int) -> "ParabolicElement":
        """'u=0,0;a=1;g1=id' (g1 as 'id' or rows separated by '/')."""
        parts = dict(p.split("=", 1) for p in s.split(";") if p.strip())
        u = tuple(float(x) for x in parts.get("u", ",".join(["0"] * r)).split(",")) if r else ()
        if len(u) == 1 and r > 1 and u[0] == 0:
            u = (0.0,) * r
        a = float(parts.get("a", "1"))
        g = parts.get("g1", "id").strip()
        g1 = None if g == "id" else np.array([[float(x) for x in row.split(",")] for row in g.split("/")])
        return ParabolicElement(u, a, g1)


def decompose_parabolic(split: IsotropicSplit, g: np.ndarray, tol: float = 1e-9) -> ParabolicElement:
    """Write g (column convention, L coordinates) as n_z(u) m_z(a, g1); fails if g does not fix the line of z."""
    g = np.asarray(g, dtype=float)
    z = np.array([float(x) for x in split.z])
    zp = np.array([float(x) for x in split.z_prime])
    gz = g @ z
    i = int(np.argmax(np.abs(z)))
    a = gz[i] / z[i]
    if np.max(np.abs(gz - a * z)) > tol * max(1.0, np.abs(g).max()):
        raise E.StrategyUnavailable("g does not stabilise the isotropic line; it is not in the parabolic")
    coords = np.linalg.solve(split.basis_matrix, g @ zp)
    r = len(split.L1_basis)
    u = a * coords[:r]
    inv_n = n_z_matrix(split, -u)
    m = np.linalg.solve(split.basis_matrix, inv_n @ g @ split.basis_matrix)
    g1 = m[:r, :r]
    pe = ParabolicElement(tuple(u), float(a), g1)
    if np.max(np.abs(pe.matrix(split) - g)) > 1e-8 * max(1.0, np.abs(g).max()):
        raise E.StrategyUnavailable("g is not of the form n_z(u) m_z(a, g1)")
    return pe


# ---------------------------------------------------------------------------
# divisor sums


def _gcd_of_dual(L1: EvenLattice, lam: Sequence[Fraction]) -> int:
    """Largest n with lam/n in L1' (lam in L1')."""
    G = L1.gram
    ints = [sum(Fraction(G[i][j]) * lam[j] for j in range(len(lam))) for i in range(len(lam))]
    if any(x.denominator != 1 for x in ints):
        raise E.NotInLattice("lambda is not in the dual of L1")
    return math.gcd(*[int(x) for x in ints])


def divisor_sum_coeff(
    f: CuspFormCoeffs,
    split: IsotropicSplit,
    lam: Sequence,
    k: int,
    b_plus: int,
    phase: int = 1,
    power=None,
    fibers: dict | None = None,
) -> complex:
    """sum over n | lam of n^power sum over delta in M'/L with pi(delta) = lam/n of e(phase (n delta, z')) c(q(lam)/n^2, delta).

    power defaults to k + (b_plus - 3)/2.
    """
    L1 = split.L1
    lam = fvec(lam)
    q = L1.q(lam)
    if q <= 0:
        raise E.ValidationError("q(lambda) must be positive")
    if f.is_zero():
        return 0j
    power = Fraction(2 * k + b_plus - 3, 2) if power is None else Fraction(power)
    fibers = descent_fibers(split) if fibers is None else fibers
    D1 = split.D1
    L = split.lattice
    zp = split.z_prime
    g = _gcd_of_dual(L1, lam)
    tot = 0j
    for n in range(1, g + 1):
        if g % n:
            continue
        arg = q / (n * n)
        key = D1.reduce(tuple(x / n for x in lam))
        ds = fibers.get(key, ())
        if not ds:
            continue
        if arg > f.max_n:
            raise E.HorizonExceeded(f"needs c({arg}, .) beyond the horizon {f.max_n}")
        inner = 0j
        for d in ds:
            c = f.coeffs.get((d, arg), 0j)
            if c:
                inner += expi(phase * n * L.bil(d, zp)) * c
        tot += float(n) ** float(power) * inner
    return tot


# ---------------------------------------------------------------------------
# archimedean terms


class LiftContext:
    """Split data, adapted isometry and its restriction v1 to L1."""

    def __init__(self, split: IsotropicSplit, v0: Isometry):
        L = split.lattice
        if split.L1 is None:
            raise E.ValidationError("L1 is empty")
        self.split, self.v0, self.L = split, v0, L
        b, bp = L.rank, L.b_plus
        z = np.array([float(x) for x in split.z])
        vz = v0(z)
        if np.max(np.abs(vz[1 : b - 1])) > 1e-9:
            raise E.ValidationError("v0 is not adapted to the split (z must map into <e_1, e_b>)")
        self.znorm = float(np.linalg.norm(vz[:bp]))
        full = v0.matrix @ split.L1_embed_np
        if np.max(np.abs(full[[0, b - 1], :])) > 1e-9:
            raise E.ValidationError("v0 is not adapted to the split (L1 must map into e_2..e_{b-1})")
        self.v1 = Isometry(full[1 : b - 1, :], bp - 1)
        self.G1 = split.L1.gram_np
        self.fibers = descent_fibers(split)

    def v1_plus(self, lam: np.ndarray, g1: np.ndarray | None) -> np.ndarray:
        x = np.asarray(lam, dtype=float)
        if g1 is not None:
            x = x @ np.linalg.inv(g1).T
        return self.v1.plus(x)


def _w_prefactor(kappa: MultiIndexKappa, a: float, znorm: float, b_plus: int) -> complex:
    k, k1 = kappa.k, kappa.k1
    m = k - k1
    ex = k + (b_plus - 1) / 2
    sgn = 1.0 if a > 0 else -1.0
    return (-1j) ** m * sgn**m * abs(a) ** ex / (2 ** (k1 + b_plus / 2 - 3) * math.factorial(m) * znorm**ex)


def W_values(ctx: LiftContext, lams: np.ndarray, kappa: MultiIndexKappa, gz: ParabolicElement, h: Poly | None = None) -> np.ndarray:
    """Archimedean kernel (with the Pochhammer factor) at many lambda in L1 coordinates, b+ > 2."""
    bp = ctx.L.b_plus
    if bp <= 2:
        raise E.ValidationError("W_values is the b+ > 2 kernel")
    if kappa.n != bp:
        raise E.ValidationError(f"kappa must have {bp - 1} entries")
    lams = np.atleast_2d(np.asarray(lams, dtype=float))
    h = vilenkin(kappa.tail()) if h is None else h
    k1 = kappa.k1
    nu = k1 + (bp - 3) / 2
    w = ctx.v1_plus(lams, None if gz.g1 is None else gz.g1_matrix(len(ctx.split.L1_basis)))
    r = np.linalg.norm(w, axis=1)
    if np.any(r == 0):
        raise E.DegenerateLambda("v1+(g1^{-1} lambda) = 0")
    x = 2 * math.pi * abs(gz.a) * r / ctx.znorm
    u = np.asarray(gz.u, dtype=float)
    ph = np.exp(2j * math.pi * (lams @ ctx.G1 @ u))
    pref = _w_prefactor(kappa, gz.a, ctx.znorm, bp) * float(poch(Fraction(2 * k1 + bp - 2, 2), kappa.k - k1))
    return pref * ph * h(w) / r**nu * kv(nu, x)


def W_term(gz: ParabolicElement, lam: Sequence, kappa: MultiIndexKappa, v0: Isometry, split: IsotropicSplit) -> complex:
    ctx = LiftContext(split, v0)
    gz.validate(split)
    return complex(W_values(ctx, np.array([[float(x) for x in lam]]), kappa, gz)[0])


# ---------------------------------------------------------------------------
# enumeration of the Fourier support


@dataclass
class FourierTerm:
    lam: tuple
    q: Fraction
    coeff: complex
    kernel: complex


@dataclass
class LiftExpansion:
    kappa: MultiIndexKappa | None
    constant_term: complex
    ct_strategy: str
    terms: list = field(default_factory=list)
    cutoff: Fraction = Fraction(0)
    value: complex = 0j
    tail: float = 0.0
    ct_error: float = 0.0

    def to_json(self) -> dict:
        return {
            "kappa": None if self.kappa is None else str(self.kappa),
            "constant_term": [self.constant_term.real, self.constant_term.imag],
            "ct_strategy": self.ct_strategy,
            "ct_error": self.ct_error,
            "cutoff": str(self.cutoff),
            "value": [self.value.real, self.value.imag],
            "tail_estimate": self.tail,
            "terms": [
                {
                    "lambda": [str(x) for x in t.lam],
                    "q": str(t.q),
                    "a": [t.coeff.real, t.coeff.imag],
                    "W": [t.kernel.real, t.kernel.imag],
                }
                for t in self.terms
            ],
        }


def _support(ctx: LiftContext, g1: np.ndarray | None, a: float, cutoff: Fraction):
    """lambda in L1' with 0 < q(lambda), in every coset, out to where the Bessel factor is negligible."""
    B = _K_CUTOFF * ctx.znorm / (2 * math.pi * abs(a))
    iso = ctx.v1 if g1 is None else ctx.v1.compose(np.linalg.inv(g1))
    L1 = ctx.split.L1
    R = math.sqrt(2 * B * B)
    out = []
    for key in ctx.split.D1.coset_reps:
        pts = enumerate_coset(L1, key, iso, R)
        if len(pts) == 0:
            continue
        qn = pts.q_numerators(L1)
        den = 2 * pts.den * pts.den
        for row, t in zip(pts.num, qn):
            q = Fraction(int(t), den)
            if q > 0:
                out.append((tuple(Fraction(int(x), pts.den) for x in row), q))
    out.sort(key=lambda it: (it[1], it[0]))
    return out, B


def _coefficient_bound(f: CuspFormCoeffs) -> float:
    """max |c(n)| / n^{nu/2} over the stored data (Hecke-type growth)."""
    nu = float(f.weight)
    return max((abs(c) / float(n) ** (nu / 2) for (_, n), c in f.coeffs.items()), default=0.0)


def _sum_terms(f, ctx, support, coeff_fn, kernel_fn, cutoff, B, k_power):
    """Shared Fourier-sum loop; returns (value, terms, tail)."""
    lams = [lam for lam, q in support]
    if not lams:
        return 0j, [], 0.0
    arr = np.array([[float(x) for x in lam] for lam in lams])
    kern, wplus = kernel_fn(arr)
    terms = []
    tot = 0j
    tail = 0.0
    cb = _coefficient_bound(f)
    nu = float(f.weight)
    nfib = max((len(v) for v in ctx.fibers.values()), default=1)
    edge = 0.0
    for i, (lam, q) in enumerate(support):
        if q > cutoff:
            # omitted by the cutoff: bound |a(lambda)| by the divisor count times the coefficient growth
            # |c(q/n^2)| <= cb (q/n^2)^{nu/2}, so |a| <= cb q^{nu/2} sum_{n | g} n^{power - nu}
            g = _gcd_of_dual(ctx.split.L1, lam)
            dsum = sum(float(n) ** (k_power - nu) for n in range(1, g + 1) if g % n == 0)
            tail += abs(kern[i]) * dsum * nfib * cb * float(q) ** (nu / 2)
            continue
        a = coeff_fn(lam)
        if a == 0:
            continue
        t = a * kern[i]
        tot += t
        if wplus[i] > 0.85 * B:
            edge += abs(t)
        terms.append(FourierTerm(lam, q, a, kern[i]))
    return tot, terms, tail + 10 * edge


def _check_form(f: CuspFormCoeffs, L: EvenLattice, k: int, cutoff) -> Fraction:
    if f.lattice.gram != L.gram:
        raise E.ValidationError("form and lattice disagree")
    f.check_weight(k)
    cutoff = Fraction(cutoff)
    if cutoff > f.max_n:
        raise E.HorizonExceeded(f"cutoff {cutoff} beyond the coefficient horizon {f.max_n}")
    return cutoff


# ---------------------------------------------------------------------------
# b+ = 2


def lift_value_b2(f: CuspFormCoeffs, tower: Tower, sign: int, k: int, gz: ParabolicElement, cutoff=6, v0: Isometry | None = None) -> LiftExpansion:
    """Lift against h_{+-k} = (x_1 +- i x_2)^k for signature (2, b-): no constant term."""
    split = tower.splits[0]
    L = split.lattice
    if L.b_plus != 2:
        raise E.ValidationError("lift_value_b2 needs b+ = 2")
    if k < 2:
        raise E.ValidationError("k must be at least 2")
    if sign not in (1, -1):
        raise E.ValidationError("sign must be +1 or -1")
    cutoff = _check_form(f, L, k, cutoff)
    gz.validate(split)
    v0 = adapted_isometry(L, tower) if v0 is None else v0
    ctx = LiftContext(split, v0)
    exp = LiftExpansion(MultiIndexKappa((k,), sign), 0j, "none", cutoff=cutoff)
    if f.is_zero():
        return exp
    r = len(split.L1_basis)
    g1 = None if gz.g1 is None else gz.g1_matrix(r)
    support, B = _support(ctx, g1, gz.a, cutoff)
    # cone: the positive coordinate of v1(lambda) is positive
    support = [(lam, q) for lam, q in support if float(ctx.v1.plus(np.array([float(x) for x in lam]))[0]) > 0]
    eps = sign * (1 if gz.a > 0 else -1)
    u = np.asarray(gz.u, dtype=float)
    pref = 2 * gz.a**k / ctx.znorm**k

    def kernel_fn(arr):
        w = ctx.v1_plus(arr, g1)[:, 0]
        ph = np.exp(2j * math.pi * eps * (arr @ ctx.G1 @ u))
        return pref * ph * np.exp(-2 * math.pi * abs(gz.a) * np.abs(w) / ctx.znorm), np.abs(w)

    def coeff_fn(lam):
        return divisor_sum_coeff(f, split, tuple(-eps * x for x in lam), k, 2, phase=-1, power=k - 1, fibers=ctx.fibers)

    val, terms, tail = _sum_terms(f, ctx, support, coeff_fn, kernel_fn, cutoff, B, k - 1)
    exp.terms, exp.value, exp.tail = terms, val, tail
    return exp


# ---------------------------------------------------------------------------
# b+ > 2

CT_STRATEGIES = ("recursive", "b2-formula", "oracle", "zero")


def _sub_tower(tower: Tower) -> Tower:
    return Tower(tower.splits[0].L1, tower.splits[1:])


def constant_term(
    f: CuspFormCoeffs,
    tower: Tower,
    kappa: MultiIndexKappa,
    gz: ParabolicElement,
    strategy: str,
    v0: Isometry,
    cutoff,
    oracle_opts: dict | None = None,
) -> tuple[complex, float]:
    """delta_{k k1} |a| / (sqrt2 ||v0+(z)||) times the L1-lift of f_{L1} against h_{kappa^(1)} at g1."""
    if strategy not in CT_STRATEGIES:
        raise E.ValidationError(f"unknown constant-term strategy {strategy!r}")
    split = tower.splits[0]
    L1 = split.L1
    k, k1 = kappa.k, kappa.k1
    if k != k1:
        return 0j, 0.0
    if strategy == "zero":
        raise E.StrategyUnavailable("the constant term is not forced to vanish when k = k1")
    ctx = LiftContext(split, v0)
    fac = abs(gz.a) / (math.sqrt(2) * ctx.znorm)
    f1 = descend_coeffs(f, split, 0, 0)
    kap1 = kappa.tail()
    r = len(split.L1_basis)
    g1 = gz.g1_matrix(r)
    if strategy == "oracle":
        from .oracle import make_grid, petersson_lift

        opts = dict(oracle_opts or {})
        grid = opts.get("grid") or make_grid(opts.get("y_max", 6.0), opts.get("nx", 48), opts.get("ny", 96), opts.get("rule", "gauss"))
        h = vilenkin(kap1)
        ov = petersson_lift(f1, L1, ctx.v1, g1, h, opts.get("R", 8.0), grid)
        return fac * ov.value, fac * ov.error_estimate
    sub = _sub_tower(tower)
    if sub.s == 0:
        raise E.StrategyUnavailable("L1 has no isotropic split in the tower; use the oracle strategy")
    v1 = adapted_isometry(L1, sub)
    if np.max(np.abs(v1.matrix - ctx.v1.matrix)) > 1e-9:
        raise E.StrategyUnavailable("the tower isometry of L1 differs from the restriction of v0")  # pragma: no cover
    sp1 = sub.splits[0]
    g1_pe = decompose_parabolic(sp1, g1)
    if L1.b_plus == 2:
        val = lift_value_b2(f1, sub, kap1.sign, k1, g1_pe, cutoff, v1)
        return fac * val.value, fac * val.tail
    if strategy == "b2-formula":
        raise E.StrategyUnavailable("b2-formula needs b+ - 1 = 2")
    inner = lift_value(f1, sub, kap1, g1_pe, cutoff, "recursive", v1)
    return fac * inner.value, fac * (inner.tail + inner.ct_error)


def lift_value(
    f: CuspFormCoeffs,
    tower: Tower,
    kappa: MultiIndexKappa,
    gz: ParabolicElement,
    cutoff=6,
    ct_strategy: str = "recursive",
    v0: Isometry | None = None,
    oracle_opts: dict | None = None,
) -> LiftExpansion:
    """Constant term plus the sum over lambda in L1' of conj(a_bar(lambda) W_lambda)."""
    split = tower.splits[0]
    L = split.lattice
    if L.b_plus <= 2:
        raise E.ValidationError("lift_value needs b+ > 2; use lift_value_b2")
    k = kappa.k
    cutoff = _check_form(f, L, k, cutoff)
    gz.validate(split)
    v0 = adapted_isometry(L, tower) if v0 is None else v0
    ctx = LiftContext(split, v0)
    if f.is_zero():
        return LiftExpansion(kappa, 0j, ct_strategy if kappa.k == kappa.k1 else "zero", cutoff=cutoff)
    if kappa.k > kappa.k1:
        ct, cterr, strat = 0j, 0.0, "zero"
    else:
        ct, cterr = constant_term(f, tower, kappa, gz, ct_strategy, v0, cutoff, oracle_opts)
        strat = ct_strategy
    r = len(split.L1_basis)
    g1 = None if gz.g1 is None else gz.g1_matrix(r)
    support, B = _support(ctx, g1, gz.a, cutoff)
    h = vilenkin(kappa.tail())

    def kernel_fn(arr):
        W = W_values(ctx, arr, kappa, gz, h)
        return np.conj(W), np.linalg.norm(ctx.v1_plus(arr, g1), axis=1)

    def coeff_fn(lam):
        return divisor_sum_coeff(f, split, lam, k, L.b_plus, phase=-1, fibers=ctx.fibers)

    val, terms, tail = _sum_terms(f, ctx, support, coeff_fn, kernel_fn, cutoff, B, k + (L.b_plus - 3) / 2)
    return LiftExpansion(kappa, ct, strat, terms, cutoff, ct + val, tail, cterr)


# ---------------------------------------------------------------------------
# lifts of Poincare series


@dataclass(frozen=True)
class PoincareLiftValue:
    value: complex
    terms: np.ndarray
    points: int
    tail: float


def poincare_lift(
    L: EvenLattice,
    v0: Isometry,
    m,
    beta: Sequence,
    p: Poly,
    g=None,
    B: float = 6.0,
    strict: bool = True,
) -> PoincareLiftValue:
    """(2 Gamma(k + b+/2 - 1)/(2 pi)^{k + b+/2 - 1}) sum over q(lambda) = m of Hp(v0+(g^-1 lambda)) / ||v0+(g^-1 lambda)||^{2k + b+ - 2}."""
    if p.n != L.b_plus:
        raise E.BadPolynomialGrading(f"p must be a polynomial in {L.b_plus} variables")
    if p.is_zero():
        return PoincareLiftValue(0j, np.zeros(0, dtype=complex), 0, 0.0)
    k = p.degree
    bp, b = L.b_plus, L.rank
    if strict and not 2 * k + bp - 2 > b - 2:
        raise E.ConvergenceViolated(f"2k + b+ - 2 = {2 * k + bp - 2} must exceed b - 2 = {b - 2}")
    g = np.eye(b) if g is None else np.asarray(g, dtype=float)
    if not is_orthogonal(L.gram, g):
        raise E.NotInOrthogonalGroup("g does not preserve the Gram matrix")
    iso = v0.compose(np.linalg.inv(g))
    pts = enumerate_hyperboloid(L, beta, m, iso, B)
    if len(pts) == 0:
        return PoincareLiftValue(0j, np.zeros(0, dtype=complex), 0, 0.0)
    Hp = project_H(p)
    vp = iso.plus(pts.as_float())
    r = np.linalg.norm(vp, axis=1)
    terms = Hp(vp) / r ** (2 * k + bp - 2)
    s = k + bp / 2 - 1
    const = 2 * math.gamma(s) / (2 * math.pi) ** s
    outer = r > B / 2
    tail = float(np.sum(np.abs(terms[outer]))) * const
    return PoincareLiftValue(complex(const * terms.sum()), const * terms, len(pts), tail)


# ---------------------------------------------------------------------------
# cuspidal exponents


def cuspidal_exponents(b: int, s: int) -> dict:
    """Exponents of the characters chi_{P_{U_r}} and chi_r, 0 <= r <= s-1, and the square-integrability verdict."""
    if b < 3 or s < 1 or 2 * s > b:
        raise E.BadSignature(f"need b >= 3 and 1 <= s <= b/2 (got b={b}, s={s})")
    rows = []
    for r in range(s):
        maximal = Fraction(-(b - r - 4) * (r + 1), 2)
        per_a = [Fraction(-(b - 2 * j - 4), 2) for j in range(r + 1)]
        split_case = 2 * s == b and r == s - 1 and s >= 2
        if split_case:
            X = Fraction(s * (b - s - 3), 4)
            ratios = [Fraction(-(j + 1) * (b - j - 4), 2) for j in range(s - 2)] + [-X - 1]
            tail_pair = -X  # exponent of |a_{s-2} a_{s-1}|
            recon = _from_ratios(ratios[:-1], r) + [Fraction(0), Fraction(0)]
            recon = recon[: r + 1]
            recon[s - 2] += ratios[-1] + tail_pair
            recon[s - 1] += -ratios[-1] + tail_pair
            form = {"ratios": [str(x) for x in ratios], "pair": str(tail_pair)}
        else:
            ratios = [Fraction(-(j + 1) * (b - j - 4), 2) for j in range(r)]
            last = Fraction(-(r + 1) * (b - r - 4), 2)
            recon = _from_ratios(ratios, r)
            recon[r] += last
            form = {"ratios": [str(x) for x in ratios], "last": str(last)}
        rows.append(
            {
                "r": r,
                "chi_P_Ur_exponent": str(maximal),
                "chi_r_exponents": [str(x) for x in per_a],
                "chi_r_ratio_form": form,
                "ratio_form_consistent": recon == per_a,
                "condition_b_minus_r_minus_4_positive": b - r - 4 > 0,
            }
        )
    if b - s - 3 > 0:
        case, verdict = "generic", "square-integrable"
    elif 2 * s == b and s in (2, 3):
        case = "O(s,s)"
        verdict = f"square-integrable (O({s},{s}): constant term along P_<=s-1 vanishes by the b+=2 expansion on O(2,2))"
    elif b == 2 * s + 1 and s in (1, 2):
        case = "O(s+1,s)"
        verdict = f"square-integrable (O({s + 1},{s}): constant term along P_<=s-1 vanishes by the b+=2 expansion on O(2,1))"
    elif b == 4 and s == 1:
        case, verdict = "O(3,1)", "exceptional case: O(3,1)"
    else:  # pragma: no cover - excluded by b >= 2s and the cases above
        case, verdict = "undetermined", "undetermined"
    return {"b": b, "s": s, "rows": rows, "case": case, "verdict": verdict}


def _from_ratios(ratios: list, r: int) -> list:
    """Exponents of a_0..a_r from prod |a_j / a_{j+1}|^{c_j}."""
    out = [Fraction(0)] * (r + 1)
    for j, c in enumerate(ratios):
        out[j] += c
        out[j + 1] -= c
    return out
