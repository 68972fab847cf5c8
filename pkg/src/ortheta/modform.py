"""Fourier coefficients of vector-valued cusp forms: storage, validation, descent and theta contraction."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import errors as E
from .lattice import (
    DiscriminantForm,
    EvenLattice,
    IsotropicSplit,
    discriminant_group,
    make_lattice,
    pi_class,
    _fincke_pohst,
)
from .qmath import (
    as_fraction,
    expi,
    format_rational,
    frac_part,
    fvec,
    hermite_rows,
    integer_kernel,
    inverse,
    matvec,
    reduce_mod1,
    smith_normal_form,
    solve_in_span,
)
from .special import jv

Key = tuple


@dataclass
class CuspFormCoeffs:
    """c(n, gamma) for gamma in D_L and rational n > 0 up to the horizon max_n."""

    lattice: EvenLattice
    weight: Fraction
    coeffs: dict = field(default_factory=dict)
    max_n: Fraction = Fraction(0)
    complete: bool = True

    @property
    def D(self) -> DiscriminantForm:
        if not hasattr(self, "_D"):
            self._D = discriminant_group(self.lattice)
        return self._D

    def validate(self) -> "CuspFormCoeffs":
        D = self.D
        for (g, n) in self.coeffs:
            if g not in D.index:
                raise E.SupportViolation(f"{g} is not a canonical coset representative")
            if n <= 0:
                raise E.SupportViolation(f"coefficient at n = {n} <= 0 is not cuspidal")
            if frac_part(n - D.q(g)) != 0:
                raise E.SupportViolation(f"n = {n} is not in q({g}) + Z")
            if n > self.max_n:
                raise E.SupportViolation(f"n = {n} beyond the declared horizon {self.max_n}")
        return self

    def c(self, n, gamma: Key) -> complex:
        n = Fraction(n)
        if n > self.max_n:
            raise E.HorizonExceeded(f"coefficient c({n}, .) requested beyond horizon {self.max_n}")
        return self.coeffs.get((gamma, n), 0j)

    def scale(self, s: complex) -> "CuspFormCoeffs":
        return CuspFormCoeffs(self.lattice, self.weight, {k: s * v for k, v in self.coeffs.items()}, self.max_n, self.complete)

    def conj(self) -> "CuspFormCoeffs":
        return CuspFormCoeffs(self.lattice, self.weight, {k: complex(v).conjugate() for k, v in self.coeffs.items()}, self.max_n, self.complete)

    def is_zero(self) -> bool:
        return not any(v != 0 for v in self.coeffs.values())

    def check_weight(self, k: int) -> None:
        if self.weight != k + Fraction(self.lattice.sig, 2):
            raise E.WeightMismatch(f"weight {self.weight} != k + sig/2 = {k + Fraction(self.lattice.sig, 2)}")

    def evaluate(self, tau: np.ndarray) -> dict:
        """f(tau) per coset on an array of tau values."""
        tau = np.asarray(tau, dtype=complex)
        out = {g: np.zeros(tau.shape, dtype=complex) for g in self.D.coset_reps}
        for (g, n), c in self.coeffs.items():
            if c != 0:
                out[g] = out[g] + c * np.exp(2j * math.pi * float(n) * tau)
        return out

    def to_json(self) -> dict:
        items = sorted(self.coeffs.items(), key=lambda kv: (kv[0][1], kv[0][0]))
        return {
            "weight": format_rational(self.weight),
            "max_n": format_rational(self.max_n),
            "gram": [list(r) for r in self.lattice.gram],
            "coeffs": [
                {"gamma": [format_rational(x) for x in g], "n": format_rational(n), "c": [complex(c).real, complex(c).imag]}
                for (g, n), c in items
            ],
        }

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)


def _parse_rational(s) -> Fraction:
    try:
        return Fraction(s) if isinstance(s, (str, int)) else as_fraction(s)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise E.ParseError(f"bad rational {s!r}") from exc


def coeffs_from_json(data: Mapping, L: EvenLattice, k: int | None = None) -> CuspFormCoeffs:
    try:
        weight = _parse_rational(data["weight"])
        rows = data["coeffs"]
    except (KeyError, TypeError) as exc:
        raise E.ParseError("coefficient file needs 'weight' and 'coeffs'") from exc
    D = discriminant_group(L)
    coeffs = {}
    top = Fraction(0)
    for row in rows:
        try:
            g = tuple(_parse_rational(x) for x in row["gamma"])
            n = _parse_rational(row["n"])
            re, im = row["c"]
            c = complex(float(re), float(im))
        except (KeyError, TypeError, ValueError) as exc:
            raise E.ParseError(f"bad coefficient row {row!r}") from exc
        if len(g) != L.rank:
            raise E.ParseError(f"gamma {row['gamma']} has the wrong length")
        key = D.reduce(g)
        if n <= 0:
            raise E.SupportViolation(f"coefficient at n = {n} <= 0 is not cuspidal")
        if frac_part(n - D.q(key)) != 0:
            raise E.SupportViolation(f"n = {n} is not in q(gamma) + Z for gamma = {key}")
        coeffs[(key, n)] = coeffs.get((key, n), 0j) + c
        top = max(top, n)
    max_n = _parse_rational(data["max_n"]) if "max_n" in data else top
    f = CuspFormCoeffs(L, weight, coeffs, max_n).validate()
    if k is not None:
        f.check_weight(k)
    return f


def load_coeffs(path: str, L: EvenLattice, k: int | None = None) -> CuspFormCoeffs:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise E.ParseError(f"{path}: {exc}") from exc
    return coeffs_from_json(data, L, k)


# ---------------------------------------------------------------------------
# reference forms for trivial discriminant


def ramanujan_tau(prec: int) -> list[int]:
    """[tau(0)=0, tau(1), ..., tau(prec)] from q prod (1 - q^m)^24."""
    if prec < 1:
        raise E.ValidationError("prec must be >= 1")
    c = [0] * prec
    c[0] = 1
    for m in range(1, prec):
        for _ in range(24):
            for n in range(prec - 1, m - 1, -1):
                c[n] -= c[n - m]
    return [0] + c


def _require_trivial(L: EvenLattice) -> None:
    if abs(L.det) != 1:
        raise E.NontrivialDiscriminant(f"|D_L| = {abs(L.det)} != 1")


def _default_unimodular() -> EvenLattice:
    from .lattice import U, direct_sum

    return direct_sum(U(), U(), U())


def delta_coeffs(prec: int, L: EvenLattice | None = None) -> CuspFormCoeffs:
    L = _default_unimodular() if L is None else L
    _require_trivial(L)
    tau = ramanujan_tau(prec)
    z = discriminant_group(L).zero
    return CuspFormCoeffs(L, Fraction(12), {(z, Fraction(n)): complex(tau[n]) for n in range(1, prec + 1)}, Fraction(prec))


def kloosterman(m: int, n: int, c: int) -> complex:
    """S(m, n; c) = sum over d in (Z/c)^* of e((m d + n dbar)/c)."""
    tot = 0j
    for d in range(c):
        if math.gcd(d, c) != 1:
            continue
        dbar = pow(d, -1, c) if c > 1 else 0
        tot += expi(Fraction(m * d + n * dbar, c))
    return tot


@dataclass(frozen=True)
class PoincareCoeffs:
    form: CuspFormCoeffs
    tail: float
    c_max: int


def classical_poincare_coeffs(k: int, m: int, prec: int, L: EvenLattice | None = None, c_max: int = 300) -> PoincareCoeffs:
    """Petersson's formula for the weight-k Poincare series P_m on SL_2(Z)."""
    L = _default_unimodular() if L is None else L
    _require_trivial(L)
    if k % 2 or k < 4:
        raise E.NotEven(f"k = {k} must be even and >= 4")
    if m < 1 or prec < 1:
        raise E.ValidationError("m and prec must be positive")
    z = discriminant_group(L).zero
    S = {}
    coeffs = {}
    sgn = (-1) ** (k // 2)
    for n in range(1, prec + 1):
        tot = 0.0
        for c in range(1, c_max + 1):
            key = (m, n, c)
            S[key] = kloosterman(m, n, c).real  # real since S(m,n;c) = conj S(m,n;c)
            tot += S[key] / c * float(jv(k - 1, 4 * math.pi * math.sqrt(m * n) / c))
        coeffs[(z, Fraction(n))] = complex((1.0 if n == m else 0.0) + 2 * math.pi * sgn * (n / m) ** ((k - 1) / 2) * tot)
    # |S| <= c and J_{k-1}(x) <= (x/2)^{k-1}/Gamma(k)
    x = 2 * math.pi * math.sqrt(m * prec)
    tail = 2 * math.pi * (prec / m) ** ((k - 1) / 2) * x ** (k - 1) / math.gamma(k) * c_max ** (-(k - 2)) / (k - 2)
    return PoincareCoeffs(CuspFormCoeffs(L, Fraction(k), coeffs, Fraction(prec)), tail, c_max)


def synthetic_coeffs(L: EvenLattice, weight, max_n, seed: int = 0, density: float = 1.0) -> CuspFormCoeffs:
    """Random complex c(n, gamma) on the full support up to max_n (for coefficient identities)."""
    rng = np.random.default_rng(seed)
    D = discriminant_group(L)
    max_n = Fraction(max_n)
    coeffs = {}
    for g in D.coset_reps:
        n = frac_part(D.q(g))
        if n == 0:
            n = Fraction(1)
        while n <= max_n:
            if rng.random() < density:
                coeffs[(g, n)] = complex(rng.normal(), rng.normal())
            n += 1
    return CuspFormCoeffs(L, Fraction(weight), coeffs, max_n)


# ---------------------------------------------------------------------------
# descent along an isotropic split


def descend_coeffs(f: CuspFormCoeffs, split: IsotropicSplit, r: int = 0, t: int = 0) -> CuspFormCoeffs:
    """c_{L1}(n, lam; r, t) = sum over delta in M'/L with pi(delta) = lam of e(-r(delta,z') - rt(z',z')/2) c(n, delta + t z')."""
    if split.L1 is None:
        raise E.ValidationError("the split has an empty L1")
    L = split.lattice
    D = split.D
    zp = split.z_prime
    qzp2 = L.bil(zp, zp)
    fibers: dict[Key, list] = {}
    for d in split.M_prime_reps:
        lam = pi_class(split, d)
        phase = -r * L.bil(d, zp) - r * t * qzp2 / 2
        shifted = D.reduce(tuple(a + t * b for a, b in zip(d, zp)))
        fibers.setdefault(lam, []).append((phase, shifted))
    by_gamma: dict[Key, list] = {}
    for (g, n), c in f.coeffs.items():
        by_gamma.setdefault(g, []).append((n, c))
    out: dict = {}
    for lam, items in fibers.items():
        for phase, shifted in items:
            e = expi(phase)
            for n, c in by_gamma.get(shifted, ()):
                out[(lam, n)] = out.get((lam, n), 0j) + e * c
    res = CuspFormCoeffs(split.L1, f.weight, out, f.max_n, f.complete)
    if r == 0 and t == 0:
        res.validate()
    return res


def descent_fibers(split: IsotropicSplit) -> dict:
    """pi-fibers of M'/L over D_{L1}."""
    out: dict[Key, list] = {}
    for d in split.M_prime_reps:
        out.setdefault(pi_class(split, d), []).append(d)
    return out


# ---------------------------------------------------------------------------
# theta contraction to a primitive sublattice


@dataclass(frozen=True)
class Sublattice:
    """A sublattice K of L given by integer basis rows (in L coordinates)."""

    ambient: EvenLattice
    basis: tuple[tuple[int, ...], ...]
    K: EvenLattice
    perp_basis: tuple[tuple[int, ...], ...]
    perp: EvenLattice | None

    def to_L(self, x: Sequence) -> tuple:
        b = self.ambient.rank
        out = [Fraction(0)] * b
        for c, v in zip(x, self.basis):
            for i in range(b):
                out[i] += Fraction(c) * v[i]
        return tuple(out)

    def from_L(self, x: Sequence) -> tuple:
        """Coordinates in the K basis of a vector of K_Q."""
        return tuple(solve_in_span([list(r) for r in self.basis], fvec(x)))

    def project(self, x: Sequence) -> tuple:
        """Orthogonal projection to K_Q, in K coordinates."""
        L = self.ambient
        rhs = [L.bil(v, x) for v in self.basis]
        return tuple(matvec(inverse([list(map(Fraction, r)) for r in self.K.gram]), rhs))


def sublattice(L: EvenLattice, basis: Sequence[Sequence[int]]) -> Sublattice:
    rows = [[int(x) for x in r] for r in basis]
    if not rows or any(len(r) != L.rank for r in rows):
        raise E.ValidationError("sublattice basis has the wrong shape")
    _, Dm, _ = smith_normal_form(rows)
    diag = [Dm[i][i] for i in range(min(len(rows), L.rank))]
    if any(d == 0 for d in diag):
        raise E.ValidationError("sublattice basis is linearly dependent")
    if any(abs(d) != 1 for d in diag):
        raise E.NotPrimitive(f"sublattice is not primitive (invariant factors {diag})")
    gram = [[int(L.bil(u, v)) for v in rows] for u in rows]
    K = make_lattice(gram)
    G = [list(r) for r in L.gram]
    KG = [matvec(G, r) for r in rows]  # (k, .) as integer functionals
    perp_rows = integer_kernel([[int(x) for x in r] for r in KG], L.rank) if len(rows) < L.rank else []
    perp_basis = tuple(tuple(int(x) for x in r) for r in perp_rows)
    perp = make_lattice([[int(L.bil(u, v)) for v in perp_basis] for u in perp_basis]) if perp_basis else None
    return Sublattice(L, tuple(tuple(r) for r in rows), K, perp_basis, perp)


@dataclass(frozen=True)
class ContractionFiber:
    """Elements mu of L'/K grouped by their D_K class: (mu + L key, q(mu_perp)) pairs."""

    fibers: dict
    q_floor: Fraction
    complete: bool


def _dual_decomposition(S: Sublattice):
    """Lifts mu_i in L' of a basis of the projection of L' to K_perp, and generators of (L' cap K_Q)."""
    L = S.ambient
    b, r = L.rank, len(S.basis)
    Ginv = L.gram_inverse
    duals = [tuple(Ginv[i][j] for i in range(b)) for j in range(b)]  # columns of G^{-1}
    # coordinates of each dual vector along the perp basis (through the Gram of perp)
    if S.perp is None:
        return [], duals
    Pg = inverse([list(map(Fraction, r_)) for r_ in S.perp.gram])
    pc = []
    for d in duals:
        rhs = [L.bil(v, d) for v in S.perp_basis]
        pc.append(matvec(Pg, rhs))
    den = 1
    for row in pc:
        for x in row:
            den = math.lcm(den, x.denominator)
    aug = [[int(x * den) for x in pc[i]] + [1 if j == i else 0 for j in range(b)] for i in range(b)]
    H = hermite_rows(aug)
    s = b - r
    lifts, kernel = [], []
    for row in H:
        head, trans = row[:s], row[s:]
        vec = tuple(sum(Fraction(t) * duals[j][i] for j, t in enumerate(trans)) for i in range(b))
        if any(head):
            lifts.append(vec)
        else:
            kernel.append(vec)
    if len(lifts) != s:
        raise E.ValidationError("projection of L' to the orthogonal complement has the wrong rank")  # pragma: no cover
    return lifts, kernel


def _finite_quotient(S: Sublattice, gens: Sequence[tuple]) -> list[tuple]:
    """Representatives of (subgroup generated by gens + K)/K, returned as L-vectors."""
    seen = {}
    zero = tuple(Fraction(0) for _ in range(len(S.basis)))
    seen[zero] = tuple(Fraction(0) for _ in range(S.ambient.rank))
    frontier = [zero]
    gk = [(reduce_mod1(S.from_L(g)), g) for g in gens]
    while frontier:
        nxt = []
        for key in frontier:
            for gkey, g in gk:
                k2 = reduce_mod1(tuple(a + b for a, b in zip(key, gkey)))
                if k2 not in seen:
                    seen[k2] = S.to_L(k2)
                    nxt.append(k2)
        frontier = nxt
    return [seen[k] for k in sorted(seen)]


def contraction_fibers(S: Sublattice, depth: Fraction) -> ContractionFiber:
    """All mu in L'/K with q(mu_perp) >= -depth (negative definite perp) or <= depth (positive definite)."""
    L = S.ambient
    DK = discriminant_group(S.K)
    DL = discriminant_group(L)
    lifts, kernel = _dual_decomposition(S)
    finite = _finite_quotient(S, kernel)
    depth = Fraction(depth)
    fibers: dict = {}
    if S.perp is None:
        combos = [()]
        sgn = 0
        complete = True
    else:
        bp, bm = S.perp.b_plus, S.perp.b_minus
        if bp and bm:
            raise E.ValidationError("the orthogonal complement of K must be definite")
        sgn = 1 if bp else -1
        complete = sgn < 0
        # Gram of the lifted perp parts, in the basis of lifts
        perp_parts = [_perp_part(S, mu) for mu in lifts]
        Gp = np.array([[float(L.bil(a, b_)) for b_ in perp_parts] for a in perp_parts]) * sgn
        ns = _fincke_pohst(Gp, np.zeros(len(lifts)), 2 * float(depth) + 1e-9, 10_000_000)
        combos = [tuple(int(x) for x in row) for row in ns]
    for combo in combos:
        base = [Fraction(0)] * L.rank
        for c, mu in zip(combo, lifts):
            for i in range(L.rank):
                base[i] += c * mu[i]
        qperp = L.q(_perp_part(S, base)) if S.perp is not None else Fraction(0)
        if abs(qperp) > depth:
            continue
        for t in finite:
            mu = tuple(a + b for a, b in zip(base, t))
            dk = DK.reduce(S.project(mu))
            dl = DL.reduce(mu)
            fibers.setdefault(dk, []).append((dl, qperp, mu))
    return ContractionFiber(fibers, -depth if sgn <= 0 else depth, complete)


def _perp_part(S: Sublattice, x: Sequence) -> tuple:
    kc = S.project(x)
    xk = S.to_L(kc)
    return tuple(Fraction(a) - b for a, b in zip(x, xk))


def contract_theta(f: CuspFormCoeffs, S: Sublattice, horizon=None) -> CuspFormCoeffs:
    """C_{L,K}(m, delta) = sum over mu in L'/K with p_K(mu) = delta of c(m + q(mu_perp), mu + L).

    With a negative definite complement the sum is finite; with a positive
    definite one it is truncated at the input horizon and flagged incomplete.
    """
    if S.ambient.gram != f.lattice.gram:
        raise E.ValidationError("sublattice lives in a different lattice")
    horizon = f.max_n if horizon is None else Fraction(horizon)
    if horizon > f.max_n:
        raise E.HorizonExceeded(f"output horizon {horizon} exceeds the input horizon {f.max_n}")
    DK = discriminant_group(S.K)
    positive = S.perp is not None and S.perp.b_plus > 0
    fib = contraction_fibers(S, f.max_n if positive else horizon)
    out: dict = {}
    for dk in DK.coset_reps:
        m = frac_part(DK.q(dk))
        if m == 0:
            m = Fraction(1)
        while m <= horizon:
            tot = 0j
            for dl, qperp, _ in fib.fibers.get(dk, ()):
                arg = m + qperp
                if 0 < arg <= f.max_n:
                    tot += f.coeffs.get((dl, arg), 0j)
            if tot != 0:
                out[(dk, m)] = tot
            m += 1
    weight = f.weight - (Fraction(S.perp.sig, 2) if S.perp is not None else 0)
    return CuspFormCoeffs(S.K, weight, out, horizon, fib.complete and f.complete)
