"""Even lattices: discriminant forms, isotropic splits, isometries and enumeration.

Coordinates are always with respect to the lattice basis.  Elements of the
dual lattice are rational vectors; discriminant classes are keyed by the
tuple of fractional parts of their coordinates.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from . import errors as E
from .qmath import (
    bilinear,
    det,
    fvec,
    frac_part,
    integer_kernel,
    inverse,
    is_integral,
    matvec,
    reduce_mod1,
    smith_normal_form,
    solve_in_span,
)

DEFAULT_POINT_CAP = 10_000_000

Key = tuple  # tuple of Fractions in [0, 1)


# --------------------------------------------------------------------------
# lattices


@dataclass(frozen=True)
class EvenLattice:
    gram: tuple[tuple[int, ...], ...]
    b_plus: int
    b_minus: int
    name: str | None = None

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def sig(self) -> int:
        return self.b_plus - self.b_minus

    @cached_property
    def det(self) -> int:
        return int(det([list(r) for r in self.gram]))

    @cached_property
    def gram_np(self) -> np.ndarray:
        return np.array(self.gram, dtype=float)

    @cached_property
    def gram_int(self) -> np.ndarray:
        return np.array(self.gram, dtype=np.int64)

    @cached_property
    def gram_inverse(self) -> list[list[Fraction]]:
        return inverse([list(r) for r in self.gram])

    def bil(self, x: Sequence, y: Sequence) -> Fraction:
        return Fraction(bilinear([list(r) for r in self.gram], fvec(x), fvec(y)))

    def q(self, x: Sequence) -> Fraction:
        return self.bil(x, x) / 2

    def to_json(self) -> dict:
        out = {"gram": [list(r) for r in self.gram]}
        if self.name:
            out["name"] = self.name
        return out


def _char_poly(m: list[list[int]]) -> list[Fraction]:
    """Characteristic polynomial coefficients (monic, highest degree first), Faddeev-LeVerrier."""
    n = len(m)
    a = [[Fraction(x) for x in r] for r in m]
    coeffs = [Fraction(1)]
    mk = [[Fraction(0)] * n for _ in range(n)]
    ident = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{k-1} I
        prod = [[sum(a[i][t] * mk[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        mk = [[prod[i][j] + coeffs[-1] * ident[i][j] for j in range(n)] for i in range(n)]
        am = [[sum(a[i][t] * mk[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        coeffs.append(-sum(am[i][i] for i in range(n)) / k)
    return coeffs


def signature_of(gram: Sequence[Sequence[int]]) -> tuple[int, int]:
    """Exact (b+, b-) of a nondegenerate symmetric integer matrix.

    A real-rooted polynomial has as many positive roots as sign changes in its
    coefficient sequence, so Descartes' rule is exact here.
    """
    cp = _char_poly([list(r) for r in gram])
    signs = [1 if c > 0 else -1 for c in cp if c != 0]
    pos = sum(1 for s, t in zip(signs, signs[1:]) if s != t)
    return pos, len(gram) - pos


def make_lattice(gram, name: str | None = None) -> EvenLattice:
    try:
        rows = [list(r) for r in gram]
    except TypeError as exc:
        raise E.NotSymmetric("gram must be a square matrix") from exc
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise E.NotSymmetric("gram must be a nonempty square matrix")
    for r in rows:
        for x in r:
            if isinstance(x, bool) or not float(x).is_integer():
                raise E.NotSymmetric(f"non-integer gram entry {x!r}")
    rows = [[int(x) for x in r] for r in rows]
    for i in range(n):
        for j in range(i):
            if rows[i][j] != rows[j][i]:
                raise E.NotSymmetric(f"gram[{i}][{j}] != gram[{j}][{i}]")
    for i in range(n):
        if rows[i][i] % 2:
            raise E.OddDiagonal(f"gram[{i}][{i}] = {rows[i][i]} is odd")
    if det(rows) == 0:
        raise E.Degenerate("gram matrix is singular")
    bp, bm = signature_of(rows)
    return EvenLattice(tuple(tuple(r) for r in rows), bp, bm, name)


def direct_sum(*lats: EvenLattice, name: str | None = None) -> EvenLattice:
    n = sum(L.rank for L in lats)
    g = [[0] * n for _ in range(n)]
    o = 0
    for L in lats:
        for i in range(L.rank):
            for j in range(L.rank):
                g[o + i][o + j] = L.gram[i][j]
        o += L.rank
    return make_lattice(g, name)


def scaled(L: EvenLattice, c: int, name: str | None = None) -> EvenLattice:
    return make_lattice([[c * x for x in r] for r in L.gram], name)


# a few standard lattices
def U(n: int = 1) -> EvenLattice:
    return make_lattice([[0, n], [n, 0]], "U" if n == 1 else f"U({n})")


def A1(sign: int = 1) -> EvenLattice:
    return make_lattice([[2 * sign]], "A1" if sign > 0 else "A1(-1)")


# --------------------------------------------------------------------------
# discriminant forms


@dataclass(frozen=True)
class DiscriminantForm:
    lattice: EvenLattice
    invariant_factors: tuple[int, ...]
    coset_reps: tuple[Key, ...]
    q_values: tuple[Fraction, ...]

    @cached_property
    def index(self) -> dict[Key, int]:
        return {g: i for i, g in enumerate(self.coset_reps)}

    def __len__(self) -> int:
        return len(self.coset_reps)

    @property
    def order(self) -> int:
        return len(self.coset_reps)

    def reduce(self, v: Sequence) -> Key:
        """Canonical key of an element of L' (raises if v is not in L')."""
        v = fvec(v)
        if len(v) != self.lattice.rank:
            raise E.ValidationError("vector has wrong length")
        gv = matvec([list(r) for r in self.lattice.gram], v)
        if not is_integral(gv):
            raise E.NotInLattice("vector is not in the dual lattice")
        return reduce_mod1(v)

    def add(self, a: Key, b: Key) -> Key:
        return reduce_mod1([x + y for x, y in zip(a, b)])

    def neg(self, a: Key) -> Key:
        return reduce_mod1([-x for x in a])

    def scale(self, n: int, a: Key) -> Key:
        return reduce_mod1([n * x for x in a])

    def q(self, a: Key) -> Fraction:
        return frac_part(self.lattice.q(a))

    def b(self, a: Key, c: Key) -> Fraction:
        return frac_part(self.lattice.bil(a, c))

    @cached_property
    def zero(self) -> Key:
        return tuple(Fraction(0) for _ in range(self.lattice.rank))


def discriminant_group(L: EvenLattice) -> DiscriminantForm:
    G = [list(r) for r in L.gram]
    Um, D, V = smith_normal_form(G)
    n = L.rank
    d = [abs(D[i][i]) for i in range(n)]
    # reps: V D^{-1} y, y_i in [0, d_i)
    keys = set()
    for y in itertools.product(*[range(di) for di in d]):
        v = [sum(Fraction(V[i][j] * y[j], d[j]) for j in range(n)) for i in range(n)]
        keys.add(reduce_mod1(v))
    reps = tuple(sorted(keys))
    if len(reps) != abs(L.det):
        raise E.ValidationError("discriminant group order mismatch")  # pragma: no cover
    qs = tuple(frac_part(L.q(g)) for g in reps)
    return DiscriminantForm(L, tuple(x for x in d if x > 1), reps, qs)


def check_discriminant_form(D: DiscriminantForm) -> int:
    """Number of pairs violating q(a+b) - q(a) - q(b) = (a, b) mod 1 (zero expected)."""
    bad = 0
    for a in D.coset_reps:
        for c in D.coset_reps:
            lhs = D.q(D.add(a, c)) - D.q(a) - D.q(c)
            if frac_part(lhs - D.b(a, c)) != 0:
                bad += 1
    return bad


# --------------------------------------------------------------------------
# isotropic vectors and splits


def _box(b: int, h: int) -> np.ndarray:
    return np.array(list(itertools.product(range(-h, h + 1), repeat=b)), dtype=np.int64)


def _sort_key(v) -> tuple:
    return (max(abs(x) for x in v), sum(abs(x) for x in v), tuple(-x for x in v))


def find_isotropic(L: EvenLattice, height_bound: int) -> tuple[int, ...]:
    """Smallest primitive isotropic vector with coordinates bounded by height_bound.

    Order: max-norm, then l1-norm, then lexicographically largest.
    """
    if height_bound < 1:
        raise E.ValidationError("height_bound must be positive")
    if L.b_plus == 0 or L.b_minus == 0:
        raise E.NoneFound("definite lattice has no isotropic vectors")
    b = L.rank
    if (2 * height_bound + 1) ** b > 5 * DEFAULT_POINT_CAP:
        raise E.BudgetExceeded("isotropic search box too large")
    pts = _box(b, height_bound)
    qv = np.einsum("ij,jk,ik->i", pts, L.gram_int, pts)
    cand = pts[(qv == 0) & np.any(pts != 0, axis=1)]
    best = None
    for v in cand:
        v = tuple(int(x) for x in v)
        if math.gcd(*v) != 1:
            continue
        if best is None or _sort_key(v) < _sort_key(best):
            best = v
    if best is None:
        raise E.NoneFound(f"no primitive isotropic vector with height <= {height_bound}")
    return best


@dataclass(frozen=True)
class IsotropicSplit:
    lattice: EvenLattice
    z: tuple[int, ...]
    z_prime: tuple[Fraction, ...]
    N: int
    zeta: tuple[int, ...]
    L1_basis: tuple[tuple[int, ...], ...]
    L1: EvenLattice | None
    M_prime_reps: tuple[Key, ...]

    @cached_property
    def D(self) -> DiscriminantForm:
        return discriminant_group(self.lattice)

    @cached_property
    def D1(self) -> DiscriminantForm | None:
        return discriminant_group(self.L1) if self.L1 is not None else None

    @cached_property
    def z_star(self) -> tuple[Fraction, ...]:
        qz = self.lattice.q(self.z_prime)
        return tuple(a - qz * b for a, b in zip(self.z_prime, self.z))

    @cached_property
    def basis_matrix(self) -> np.ndarray:
        """Columns: L1 basis, z', z (in L coordinates)."""
        cols = [list(map(float, v)) for v in self.L1_basis] + [
            [float(x) for x in self.z_prime],
            [float(x) for x in self.z],
        ]
        return np.array(cols, dtype=float).T

    def L1_to_L(self, x: Sequence) -> tuple:
        """Embed L1-coordinates into L-coordinates."""
        b = self.lattice.rank
        out = [Fraction(0)] * b
        for c, v in zip(x, self.L1_basis):
            for i in range(b):
                out[i] += Fraction(c) * v[i]
        return tuple(out)

    @cached_property
    def L1_embed_np(self) -> np.ndarray:
        """Matrix (b x rank L1) sending L1 coordinates to L coordinates."""
        if not self.L1_basis:
            return np.zeros((self.lattice.rank, 0))
        return np.array(self.L1_basis, dtype=float).T

    def pairing_z(self, v: Sequence) -> Fraction:
        return self.lattice.bil(v, self.z)

    def pairing_zp(self, v: Sequence) -> Fraction:
        return self.lattice.bil(v, self.z_prime)


def _choose_z_prime(L: EvenLattice, z: Sequence[int]) -> tuple[Fraction, ...]:
    """z' = G^{-1} w with z.w = 1, minimising the size of z' over a growing box of w."""
    b = L.rank
    Ginv = L.gram_inverse
    dd = abs(L.det)
    adj = np.array([[int(x * L.det) for x in row] for row in Ginv], dtype=np.int64)
    zz = np.array(z, dtype=np.int64)
    for h in range(1, 6):
        if (2 * h + 1) ** b > 4_000_000:
            break
        W = _box(b, h)
        W = W[W @ zz == 1]
        if len(W) == 0:
            continue
        Z = W @ adj.T  # numerators of z' over det
        key_max = np.abs(Z).max(axis=1)
        key_sum = np.abs(Z).sum(axis=1)
        order = np.lexsort(tuple(Z[:, i] for i in reversed(range(b))) + (key_sum, key_max))
        best = W[order[0]]
        return tuple(Fraction(int(x), L.det) for x in adj @ best)
    # fall back: extended gcd on z
    w = _bezout(list(z))
    zp = matvec(Ginv, w)
    _ = dd
    return tuple(Fraction(x) for x in zp)


def _bezout(v: list[int]) -> list[int]:
    """Integer vector w with v.w = gcd(v)."""
    from .qmath import ext_gcd

    w = [0] * len(v)
    g = 0
    for i, x in enumerate(v):
        if x == 0:
            continue
        if g == 0:
            g, w[i] = abs(x), (1 if x > 0 else -1)
            continue
        g2, s, t = ext_gcd(g, x)
        w = [s * wi for wi in w]
        w[i] = t
        g = g2
    return w


def split_at(L: EvenLattice, z: Sequence, z_prime: Sequence | None = None) -> IsotropicSplit:
    zf = fvec(z)
    if len(zf) != L.rank:
        raise E.ValidationError("z has wrong length")
    if not is_integral(zf):
        raise E.NotInLattice("z must have integer coordinates")
    zi = tuple(int(x) for x in zf)
    if not any(zi):
        raise E.NotPrimitive("z = 0")
    if math.gcd(*zi) != 1:
        raise E.NotPrimitive(f"z = {zi} is not primitive")
    if L.q(zi) != 0:
        raise E.NotIsotropic(f"q(z) = {L.q(zi)} != 0")
    G = [list(r) for r in L.gram]
    Gz = matvec(G, zi)
    N = math.gcd(*Gz)
    w = _bezout(Gz)
    zeta = tuple(w)
    if z_prime is None:
        zp = _choose_z_prime(L, zi)
    else:
        zp = fvec(z_prime)
        if not is_integral(matvec(G, zp)):
            raise E.NotInLattice("z' is not in the dual lattice")
        if L.bil(zi, zp) != 1:
            raise E.ValidationError("(z, z') must equal 1")
    wz = [int(x) for x in matvec(G, zp)]
    ker = integer_kernel([Gz, wz])
    L1_basis = tuple(tuple(int(x) for x in r) for r in ker)
    # additive decomposition L = L1 + Z zeta + Z z
    full = [list(r) for r in L1_basis] + [list(zeta), list(zi)]
    if abs(det(full)) != 1:
        raise E.ValidationError("split does not decompose L")  # pragma: no cover
    L1 = None
    if L1_basis:
        g1 = [[L.bil(u, v) for v in L1_basis] for u in L1_basis]
        L1 = make_lattice([[int(x) for x in r] for r in g1])
    D = discriminant_group(L)
    mp = tuple(g for g in D.coset_reps if L.bil(g, zi) % N == 0)
    sp = IsotropicSplit(L, zi, zp, N, zeta, L1_basis, L1, mp)
    return sp


def project_pi(split: IsotropicSplit, lam: Sequence) -> tuple[Fraction, ...]:
    """pi(lam) = lam_{L1} - ((lam, z)/N) zeta_{L1}, returned in L1 coordinates."""
    L = split.lattice
    lam = fvec(lam)
    if not is_integral(matvec([list(r) for r in L.gram], lam)):
        raise E.NotInLattice("lambda is not in the dual lattice")
    c = L.bil(lam, split.z)
    if (c / split.N).denominator != 1:
        raise E.NotInMPrime(f"(lambda, z) = {c} is not divisible by N = {split.N}")
    c = c / split.N
    vec = _project_L1(split, lam)
    zt = _project_L1(split, split.zeta)
    v = [a - c * b for a, b in zip(vec, zt)]
    if not split.L1_basis:
        return ()
    return tuple(solve_in_span([list(r) for r in split.L1_basis], v))


def _project_L1(split: IsotropicSplit, x: Sequence[Fraction]) -> list[Fraction]:
    L = split.lattice
    z, zp = split.z, split.z_prime
    beta = L.bil(x, z)
    alpha = L.bil(x, zp) - beta * L.bil(zp, zp)
    return [xi - alpha * a - beta * b for xi, a, b in zip(x, z, zp)]


def pi_class(split: IsotropicSplit, delta: Key) -> Key:
    """The class of pi(delta) in D_{L1}."""
    return reduce_mod1(project_pi(split, delta))


# --------------------------------------------------------------------------
# towers


@dataclass(frozen=True)
class Tower:
    lattice: EvenLattice
    splits: tuple[IsotropicSplit, ...]

    @property
    def s(self) -> int:
        return len(self.splits)

    def embed(self, j: int, x: Sequence) -> tuple:
        """Map L_j coordinates into L_0 coordinates."""
        v = tuple(x)
        for i in reversed(range(j)):
            v = self.splits[i].L1_to_L(v)
        return v

    @property
    def core(self) -> EvenLattice | None:
        return self.splits[-1].L1 if self.splits else self.lattice


def build_tower(L: EvenLattice, zs: Sequence[Sequence] | None = None, height_bound: int = 2) -> Tower:
    """Split repeatedly; with zs=None, keep finding isotropic vectors until none remain."""
    splits = []
    cur = L
    i = 0
    while cur is not None:
        if zs is not None:
            if i >= len(zs):
                break
            z = zs[i]
        else:
            if cur.b_plus == 0 or cur.b_minus == 0:
                break
            try:
                z = find_isotropic(cur, height_bound)
            except E.NoneFound:
                break
        sp = split_at(cur, z)
        splits.append(sp)
        cur = sp.L1
        i += 1
    return Tower(L, tuple(splits))


def validate_tower(L: EvenLattice, tower: Sequence[IsotropicSplit]) -> Tower:
    cur: EvenLattice | None = L
    for j, sp in enumerate(tower):
        if cur is None or sp.lattice.gram != cur.gram:
            raise E.InvalidTower(f"split {j} is not a split of the previous L1")
        cur = sp.L1
    return Tower(L, tuple(tower))


# --------------------------------------------------------------------------
# isometries


@dataclass(frozen=True)
class Isometry:
    matrix: np.ndarray
    b_plus: int
    tolerance: float = 1e-12

    @property
    def b(self) -> int:
        return self.matrix.shape[0]

    @property
    def J(self) -> np.ndarray:
        return np.diag([1.0] * self.b_plus + [-1.0] * (self.b - self.b_plus))

    def defect(self, gram) -> float:
        m = self.matrix
        return float(np.max(np.abs(m.T @ self.J @ m - np.asarray(gram, dtype=float))))

    def __call__(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.matrix.T

    def plus(self, x) -> np.ndarray:
        return self(x)[..., : self.b_plus]

    def minus(self, x) -> np.ndarray:
        return self(x)[..., self.b_plus :]

    def compose(self, g: np.ndarray) -> "Isometry":
        """The isometry x -> v(g x)."""
        return Isometry(self.matrix @ np.asarray(g, dtype=float), self.b_plus, self.tolerance)


def standard_isometry(L: EvenLattice) -> Isometry:
    w, P = np.linalg.eigh(L.gram_np)
    order = np.concatenate([np.where(w > 0)[0], np.where(w < 0)[0]])
    w, P = w[order], P[:, order]
    M = np.sqrt(np.abs(w))[:, None] * P.T
    iso = Isometry(M, L.b_plus)
    if iso.defect(L.gram) > 1e-12 * max(1.0, float(np.abs(L.gram_np).max())):
        raise E.NumericFailure("standard isometry lost accuracy")  # pragma: no cover
    return iso


def adapted_isometry(L: EvenLattice, tower: Sequence[IsotropicSplit] | Tower) -> Isometry:
    """Isometry sending (z_j +- z_j*)/sqrt2 to e_{j+1}, e_{b-j} and the core to the middle block."""
    tw = tower if isinstance(tower, Tower) else validate_tower(L, tower)
    if tw.lattice.gram != L.gram:
        raise E.InvalidTower("tower belongs to a different lattice")
    b, s = L.rank, tw.s
    if s > min(L.b_plus, L.b_minus):
        raise E.InvalidTower("too many splits")  # pragma: no cover
    src, dst = [], []
    r2 = math.sqrt(2.0)
    for j, sp in enumerate(tw.splits):
        z = np.array([float(x) for x in tw.embed(j, sp.z)])
        zs = np.array([float(x) for x in tw.embed(j, sp.z_star)])
        src += [(z + zs) / r2, (z - zs) / r2]
        e_p = np.zeros(b)
        e_p[j] = 1.0
        e_m = np.zeros(b)
        e_m[b - 1 - j] = 1.0
        dst += [e_p, e_m]
    core = tw.core
    if core is not None and b - 2 * s > 0:
        S = standard_isometry(core).matrix
        for i in range(core.rank):
            basis_vec = [0] * core.rank
            basis_vec[i] = 1
            src.append(np.array([float(x) for x in tw.embed(s, basis_vec)]))
            t = np.zeros(b)
            t[s : b - s] = S[:, i]
            dst.append(t)
    B = np.array(src).T
    T = np.array(dst).T
    M = T @ np.linalg.inv(B)
    iso = Isometry(M, L.b_plus)
    if iso.defect(L.gram) > 1e-10 * max(1.0, float(np.abs(L.gram_np).max())):
        raise E.InvalidTower("adapted isometry failed the isometry check")
    return iso


# --------------------------------------------------------------------------
# enumeration


@dataclass(frozen=True)
class PointSet:
    """Lattice points num/den (rows), in lexicographic order of numerators."""

    num: np.ndarray
    den: int

    def __len__(self) -> int:
        return int(self.num.shape[0])

    def __iter__(self) -> Iterator[tuple[Fraction, ...]]:
        for row in self.num:
            yield tuple(Fraction(int(x), self.den) for x in row)

    def as_float(self) -> np.ndarray:
        return self.num.astype(float) / self.den

    def q_values(self, L: EvenLattice) -> list[Fraction]:
        """Exact q for every point."""
        g = L.gram_int
        nums = np.einsum("ij,jk,ik->i", self.num, g, self.num)
        return [Fraction(int(x), 2 * self.den * self.den) for x in nums]

    def q_numerators(self, L: EvenLattice) -> np.ndarray:
        """Integers t with q = t / (2 den^2)."""
        return np.einsum("ij,jk,ik->i", self.num, L.gram_int, self.num)

    def take(self, mask) -> "PointSet":
        return PointSet(self.num[mask], self.den)

    def to_list(self) -> list[tuple[Fraction, ...]]:
        return list(self)


def _fincke_pohst(A: np.ndarray, shift: np.ndarray, R2: float, cap: int) -> np.ndarray:
    """Integer vectors n with (n+shift)^T A (n+shift) <= R2, breadth-first over coordinates."""
    b = A.shape[0]
    Rc = np.linalg.cholesky(A).T  # upper triangular, A = Rc^T Rc
    diag = np.diag(Rc)
    mu = Rc / diag[:, None]  # row i: mu[i, j] for j > i
    eps = 1e-12 * max(1.0, R2)
    # partial solutions: x_{i..b-1} (float, shifted) and remaining budget
    xs = np.zeros((1, 0))
    ns = np.zeros((1, 0), dtype=np.int64)
    rem = np.array([R2 + eps])
    for i in reversed(range(b)):
        if xs.shape[1]:
            c = -(xs @ mu[i, i + 1 :])
        else:
            c = np.zeros(len(rem))
        w = np.sqrt(np.maximum(rem, 0.0)) / diag[i]
        lo = np.ceil(c - w - shift[i] - 1e-12).astype(np.int64)
        hi = np.floor(c + w - shift[i] + 1e-12).astype(np.int64)
        cnt = np.maximum(hi - lo + 1, 0)
        total = int(cnt.sum())
        if total > cap:
            raise E.BudgetExceeded(f"enumeration exceeds the cap of {cap} points")
        if total == 0:
            return np.zeros((0, b), dtype=np.int64)
        parent = np.repeat(np.arange(len(rem)), cnt)
        start = np.repeat(np.cumsum(cnt) - cnt, cnt)
        offs = np.arange(total) - start
        n_i = lo[parent] + offs
        x_i = n_i + shift[i]
        d = x_i - c[parent]
        new_rem = rem[parent] - (diag[i] ** 2) * d * d
        keep = new_rem >= -eps
        parent, n_i, x_i, new_rem = parent[keep], n_i[keep], x_i[keep], new_rem[keep]
        xs = np.column_stack([x_i, xs[parent]]) if xs.shape[1] else x_i[:, None]
        ns = np.column_stack([n_i, ns[parent]]) if ns.shape[1] else n_i[:, None]
        rem = new_rem
    return ns


def enumerate_coset(
    L: EvenLattice,
    gamma: Sequence,
    v0: Isometry,
    R: float,
    cap: int = DEFAULT_POINT_CAP,
) -> PointSet:
    """All lambda in L + gamma with ||v0(lambda)||^2 <= R^2 (majorant norm)."""
    if R < 0:
        raise E.ValidationError("R must be nonnegative")
    g = fvec(gamma)
    den = 1
    for x in g:
        den = math.lcm(den, x.denominator)
    gnum = np.array([int(x * den) for x in g], dtype=np.int64)
    if R == 0:
        if any(g):
            return PointSet(np.zeros((0, L.rank), dtype=np.int64), den)
        return PointSet(np.zeros((1, L.rank), dtype=np.int64), den)
    M = v0.matrix
    A = M.T @ M
    shift = np.array([float(x) for x in g])
    ns = _fincke_pohst(A, shift, float(R) ** 2, cap)
    num = ns * den + gnum[None, :]
    if len(num):
        order = np.lexsort(tuple(num[:, i] for i in reversed(range(L.rank))))
        num = num[order]
    return PointSet(num, den)


def enumerate_hyperboloid(
    L: EvenLattice,
    beta: Sequence,
    m,
    v0: Isometry,
    B: float,
    strict: bool = True,
    cap: int = DEFAULT_POINT_CAP,
) -> PointSet:
    """lambda in L + beta with q(lambda) = m and ||v0+(lambda)|| <= B."""
    m = Fraction(m)
    bt = fvec(beta)
    if frac_part(m - L.q(bt)) != 0:
        raise E.ValidationError("m is not in q(beta) + Z")
    if B * B < 2 * m:
        if strict:
            raise E.EmptySlice(f"B^2 = {B * B} < 2m = {2 * m}: the slice is empty")
        den = 1
        for x in bt:
            den = math.lcm(den, x.denominator)
        return PointSet(np.zeros((0, L.rank), dtype=np.int64), den)
    R2 = max(2 * B * B - 2 * float(m), 0.0)
    pts = enumerate_coset(L, bt, v0, math.sqrt(R2) if R2 > 0 else 0.0, cap)
    if len(pts) == 0:
        return pts
    t = pts.q_numerators(L)
    target = m * 2 * pts.den * pts.den
    mask = t == int(target) if target.denominator == 1 else np.zeros(len(t), bool)
    vp = v0.plus(pts.as_float())
    mask &= (vp**2).sum(axis=1) <= B * B * (1 + 1e-12) + 1e-12
    return pts.take(mask)


def box_enumerate(L: EvenLattice, gamma: Sequence, v0: Isometry, R: float, h: int) -> PointSet:
    """Brute-force reference enumeration over the box |n_i| <= h."""
    g = fvec(gamma)
    den = 1
    for x in g:
        den = math.lcm(den, x.denominator)
    gnum = np.array([int(x * den) for x in g], dtype=np.int64)
    pts = _box(L.rank, h) * den + gnum[None, :]
    vv = v0(pts.astype(float) / den)
    keep = (vv**2).sum(axis=1) <= R * R * (1 + 1e-12) + 1e-12
    num = pts[keep]
    order = np.lexsort(tuple(num[:, i] for i in reversed(range(L.rank))))
    return PointSet(num[order], den)


# --------------------------------------------------------------------------
# parabolic elements


def n_z_matrix(split: IsotropicSplit, u: Sequence[float]) -> np.ndarray:
    """Column-convention matrix of n_z(u) on L coordinates; u in L1 coordinates."""
    L = split.lattice
    G = L.gram_np
    z = np.array([float(x) for x in split.z])
    zp = np.array([float(x) for x in split.z_prime])
    uL = split.L1_embed_np @ np.asarray(u, dtype=float) if split.L1_basis else np.zeros(L.rank)
    qu = 0.5 * uL @ G @ uL
    imgs = []
    for v in split.L1_basis:
        x = np.array(v, dtype=float)
        imgs.append(x - (uL @ G @ x) * z)
    imgs.append(-qu * z + uL + zp)
    imgs.append(z)
    return np.array(imgs).T @ np.linalg.inv(split.basis_matrix)


def m_z_matrix(split: IsotropicSplit, a: float, g1: np.ndarray | None = None) -> np.ndarray:
    """Column-convention matrix of m_z(a, g1); g1 acts on L1 coordinates."""
    L = split.lattice
    z = np.array([float(x) for x in split.z])
    zp = np.array([float(x) for x in split.z_prime])
    qzp = float(L.q(split.z_prime))
    r = len(split.L1_basis)
    g1 = np.eye(r) if g1 is None else np.asarray(g1, dtype=float)
    Bm = split.L1_embed_np
    imgs = [Bm @ g1[:, i] for i in range(r)]
    imgs.append(zp / a + (a - 1.0 / a) * qzp * z)
    imgs.append(a * z)
    return np.array(imgs).T @ np.linalg.inv(split.basis_matrix)


def is_orthogonal(gram, g: np.ndarray, tol: float = 1e-9) -> bool:
    G = np.asarray(gram, dtype=float)
    g = np.asarray(g, dtype=float)
    return bool(np.max(np.abs(g.T @ G @ g - G)) <= tol * max(1.0, float(np.abs(G).max())))
