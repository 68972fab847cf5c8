"""Sparse homogeneous polynomials with Gaussian-rational coefficients.

Covers the Euclidean Laplacian, the harmonic projection H, Gegenbauer
polynomials, the Vilenkin basis h_kappa and the heat operator exp(-Delta/8 pi y).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import errors as E


class QI:
    """Gaussian rational re + i*im."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def of(x) -> "QI":
        if isinstance(x, QI):
            return x
        if isinstance(x, complex):
            raise TypeError("use exact values for QI")
        return QI(x)

    def __add__(self, o):
        o = QI.of(o)
        return QI(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return QI(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-QI.of(o))

    def __rsub__(self, o):
        return QI.of(o) - self

    def __mul__(self, o):
        o = QI.of(o)
        return QI(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = Fraction(o)
        return QI(self.re / o, self.im / o)

    def __eq__(self, o):
        try:
            o = QI.of(o)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def conj(self) -> "QI":
        return QI(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if not self.im:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


I_UNIT = QI(0, 1)

Exp = tuple  # exponent multi-index


class Poly:
    """Polynomial in n variables: exponent tuple -> QI coefficient (zeros dropped)."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[Exp, object] | None = None):
        self.n = n
        t: dict[Exp, QI] = {}
        for e, c in (terms or {}).items():
            if len(e) != n:
                raise E.ValidationError("exponent length does not match dimension")
            c = QI.of(c)
            if c:
                t[tuple(e)] = t.get(tuple(e), QI()) + c
        self.terms = {e: c for e, c in t.items() if c}

    # constructors
    @staticmethod
    def const(n: int, c=1) -> "Poly":
        return Poly(n, {(0,) * n: c})

    @staticmethod
    def var(n: int, i: int) -> "Poly":
        e = [0] * n
        e[i] = 1
        return Poly(n, {tuple(e): 1})

    @staticmethod
    def norm2(n: int, start: int = 0) -> "Poly":
        """x_start^2 + ... + x_{n-1}^2."""
        out = {}
        for i in range(start, n):
            e = [0] * n
            e[i] = 2
            out[tuple(e)] = 1
        return Poly(n, out)

    # algebra
    def __add__(self, o):
        if not isinstance(o, Poly):
            o = Poly.const(self.n, o)
        self._same(o)
        t = dict(self.terms)
        for e, c in o.terms.items():
            t[e] = t.get(e, QI()) + c
        return Poly(self.n, t)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, o):
        return self + (-o if isinstance(o, Poly) else -QI.of(o))

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if not isinstance(o, Poly):
            o = QI.of(o)
            return Poly(self.n, {e: c * o for e, c in self.terms.items()})
        self._same(o)
        t: dict[Exp, QI] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, QI()) + c1 * c2
        return Poly(self.n, t)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Poly.const(self.n, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, o):
        if isinstance(o, Poly):
            return self.n == o.n and self.terms == o.terms
        return NotImplemented

    def __hash__(self):  # pragma: no cover - polynomials are not dict keys in practice
        return hash((self.n, frozenset(self.terms.items())))

    def _same(self, o: "Poly"):
        if o.n != self.n:
            raise E.ValidationError("polynomials live in different dimensions")

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> set[int]:
        return {sum(e) for e in self.terms}

    @property
    def degree(self) -> int:
        ds = self.degrees()
        if not ds:
            return 0
        if len(ds) != 1:
            raise E.BadPolynomialGrading("polynomial is not homogeneous")
        return ds.pop()

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def conj(self) -> "Poly":
        return Poly(self.n, {e: c.conj() for e, c in self.terms.items()})

    def diff(self, i: int) -> "Poly":
        t = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                t[tuple(e2)] = c * e[i]
        return Poly(self.n, t)

    def embed(self, n: int, offset: int) -> "Poly":
        """Same polynomial viewed in n variables, shifted by offset."""
        t = {}
        for e, c in self.terms.items():
            e2 = [0] * n
            e2[offset : offset + self.n] = e
            t[tuple(e2)] = c
        return Poly(n, t)

    def __call__(self, X) -> np.ndarray | complex:
        """Evaluate at a point (length n) or at the rows of an (N, n) array."""
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X2 = X[None, :] if single else X
        out = _evaluate(self.terms, X2)
        return complex(out[0]) if single else out

    def exact_value(self, x: Sequence) -> QI:
        x = [Fraction(t) for t in x]
        tot = QI()
        for e, c in self.terms.items():
            m = Fraction(1)
            for xi, ei in zip(x, e):
                m *= xi**ei
            tot = tot + c * m
        return tot

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {"exp": list(e), "re": f"{c.re.numerator}/{c.re.denominator}", "im": f"{c.im.numerator}/{c.im.denominator}"}
                for e, c in sorted(self.terms.items(), reverse=True)
            ],
        }

    @staticmethod
    def from_json(d: dict) -> "Poly":
        return Poly(int(d["n"]), {tuple(t["exp"]): QI(Fraction(t["re"]), Fraction(t["im"])) for t in d["terms"]})

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"x{i + 1}^{p}" if p > 1 else f"x{i + 1}" for i, p in enumerate(e) if p)
            parts.append(f"{c!r}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def _evaluate(terms: Mapping[Exp, QI | complex], X: np.ndarray) -> np.ndarray:
    N, n = X.shape
    if not terms:
        return np.zeros(N, dtype=complex)
    maxp = [max(e[i] for e in terms) for i in range(n)]
    powers = []
    for i in range(n):
        pw = np.ones((maxp[i] + 1, N))
        for p in range(1, maxp[i] + 1):
            pw[p] = pw[p - 1] * X[:, i]
        powers.append(pw)
    re = np.zeros(N)
    im = np.zeros(N)
    for e, c in terms.items():
        m = np.ones(N)
        for i, p in enumerate(e):
            if p:
                m = m * powers[i][p]
        c = complex(c)
        if c.real:
            re += c.real * m
        if c.imag:
            im += c.imag * m
    return re + 1j * im


class NumPoly:
    """Polynomial with complex float coefficients (heat-operator output)."""

    def __init__(self, n: int, terms: Mapping[Exp, complex]):
        self.n = n
        self.terms = {e: complex(c) for e, c in terms.items() if c != 0}

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        out = _evaluate(self.terms, X[None, :] if single else X)
        return complex(out[0]) if single else out

    def coefficient(self, e: Exp) -> complex:
        return self.terms.get(tuple(e), 0j)


# ---------------------------------------------------------------------------
# operators


def laplacian(p: Poly) -> Poly:
    out = Poly(p.n)
    for i in range(p.n):
        out = out + p.diff(i).diff(i)
    return out


def _ratio_gamma(a: Fraction, j: int) -> Fraction:
    """Gamma(a - j) / Gamma(a) for a - j > 0."""
    r = Fraction(1)
    for i in range(1, j + 1):
        r /= a - i
    return r


def project_H(p: Poly) -> Poly:
    """Orthogonal projection of a homogeneous polynomial onto the harmonic polynomials."""
    if p.is_zero():
        return p
    k = p.degree
    n = p.n
    a = Fraction(n, 2) + k - 1
    out = Poly(n)
    lap = p
    r2 = Poly.norm2(n)
    r2j = Poly.const(n, 1)
    for j in range(k // 2 + 1):
        if j:
            lap = laplacian(lap)
            r2j = r2j * r2
        if lap.is_zero():
            break
        coef = Fraction((-1) ** j, 4**j * math.factorial(j)) * _ratio_gamma(a, j)
        out = out + (r2j * lap) * coef
    return out


def is_harmonic(p: Poly) -> bool:
    return laplacian(p).is_zero()


def poch(a: Fraction, m: int) -> Fraction:
    r = Fraction(1)
    for i in range(m):
        r *= a + i
    return r


def gegenbauer_coeffs(m: int, lam) -> list[tuple[int, Fraction]]:
    """C_m^lam(z) = sum_j coeff_j z^{m-2j}; returned as (power, coefficient)."""
    lam = Fraction(lam)
    out = []
    for j in range(m // 2 + 1):
        c = Fraction((-1) ** j, math.factorial(j) * math.factorial(m - 2 * j)) * poch(lam, m - j) * 2 ** (m - 2 * j)
        out.append((m - 2 * j, c))
    return out


def gegenbauer(m: int, lam, z):
    """Gegenbauer polynomial C_m^lam(z); exact for rational z, float otherwise."""
    if m < 0:
        raise E.ValidationError("degree must be nonnegative")
    if Fraction(lam) <= 0:
        raise E.ValidationError("lam must be positive")
    cs = gegenbauer_coeffs(m, lam)
    if isinstance(z, (int, Fraction)):
        z = Fraction(z)
        return sum((c * z**p for p, c in cs), Fraction(0))
    z = np.asarray(z, dtype=float)
    return sum(float(c) * z**p for p, c in cs)


def homogeneous_gegenbauer(n: int, m: int, lam, j: int) -> Poly:
    """||x||_j^m C_m^lam(x_{j+1}/||x||_j) with ||x||_j^2 = x_{j+1}^2 + ... + x_n^2 (0-based index j)."""
    xj = Poly.var(n, j)
    r2 = Poly.norm2(n, j)
    out = Poly(n)
    for p, c in gegenbauer_coeffs(m, lam):
        i = (m - p) // 2
        out = out + (xj**p) * (r2**i) * c
    return out


def homogeneous_chebyshev(n: int, m: int, j: int) -> Poly:
    """||x||_j^m T_m(x_{j+1}/||x||_j), the lam = 0 member of the Gegenbauer family."""
    xj = Poly.var(n, j)
    r2 = Poly.norm2(n, j)
    out = Poly(n)
    for i in range(m // 2 + 1):
        c = Fraction(m, 2) * Fraction((-1) ** i * math.factorial(m - i - 1), math.factorial(i) * math.factorial(m - 2 * i)) * 2 ** (m - 2 * i)
        out = out + (xj ** (m - 2 * i)) * (r2**i) * c
    return out


@dataclass(frozen=True)
class MultiIndexKappa:
    entries: tuple[int, ...]
    sign: int = 1

    def __post_init__(self):
        if not self.entries:
            raise E.ValidationError("empty multi-index")
        if any(b > a for a, b in zip(self.entries, self.entries[1:])):
            raise E.ValidationError("kappa must be weakly decreasing")
        if self.entries[-1] < 0 or self.sign not in (1, -1):
            raise E.ValidationError("last entry must be nonnegative with sign +-1")

    @property
    def k(self) -> int:
        return self.entries[0]

    @property
    def k1(self) -> int:
        return self.entries[1] if len(self.entries) > 1 else self.entries[0]

    @property
    def n(self) -> int:
        return len(self.entries) + 1

    def tail(self) -> "MultiIndexKappa":
        return MultiIndexKappa(self.entries[1:], self.sign)

    @staticmethod
    def parse(s: str) -> "MultiIndexKappa":
        parts = [t.strip() for t in s.split(",") if t.strip()]
        vals = [int(t) for t in parts]
        sign = -1 if parts[-1].startswith("-") else 1
        return MultiIndexKappa(tuple(abs(v) if i == len(vals) - 1 else v for i, v in enumerate(vals)), sign)

    def __str__(self):
        head = ",".join(str(x) for x in self.entries[:-1])
        last = ("-" if self.sign < 0 else "") + str(self.entries[-1])
        return f"({head + ',' if head else ''}{last})"


def vilenkin(kappa: MultiIndexKappa) -> Poly:
    """h_kappa in n = len(kappa)+1 variables."""
    n = kappa.n
    ks = kappa.entries
    last = Poly.var(n, n - 2) + Poly.var(n, n - 1) * QI(0, kappa.sign)
    h = last ** ks[-1]
    for j in range(n - 2):
        m = ks[j] - ks[j + 1]
        if m:
            lam = ks[j + 1] + Fraction(n - j - 2, 2)
            h = h * homogeneous_gegenbauer(n, m, lam, j)
    return h


def kappas(n: int, k: int) -> list[MultiIndexKappa]:
    if n < 2 or k < 0:
        raise E.ValidationError("need n >= 2 and k >= 0")
    out = []

    def rec(prefix, remaining):
        if remaining == 0:
            last = prefix[-1]
            out.append(MultiIndexKappa(tuple(prefix), 1))
            if last > 0:
                out.append(MultiIndexKappa(tuple(prefix), -1))
            return
        for v in range(prefix[-1], -1, -1):
            rec(prefix + [v], remaining - 1)

    rec([k], n - 2)
    return out


def vilenkin_basis(n: int, k: int) -> list[tuple[MultiIndexKappa, Poly]]:
    return [(kap, vilenkin(kap)) for kap in kappas(n, k)]


def dim_harmonic(n: int, k: int) -> int:
    return math.comb(n + k - 1, k) - (math.comb(n + k - 3, k - 2) if k >= 2 else 0)


def poly_rank(polys: Sequence[Poly]) -> int:
    """Rank of a family of polynomials over Q(i), computed exactly."""
    monos = sorted({e for p in polys for e in p.terms})
    rows = [[p.terms.get(e, QI()) for e in monos] for p in polys]
    rk = 0
    ncol = len(monos)
    for c in range(ncol):
        piv = next((r for r in range(rk, len(rows)) if rows[r][c]), None)
        if piv is None:
            continue
        rows[rk], rows[piv] = rows[piv], rows[rk]
        pv = rows[rk][c]
        inv = _qi_inv(pv)
        rows[rk] = [x * inv for x in rows[rk]]
        for r in range(len(rows)):
            if r != rk and rows[r][c]:
                f = rows[r][c]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rk])]
        rk += 1
    return rk


def _qi_inv(z: QI) -> QI:
    d = z.re * z.re + z.im * z.im
    return QI(z.re / d, -z.im / d)


def one_step_factor(m: int, lam) -> Fraction:
    """Constant c with H(x_1^m h) = c ||x||^m C_m^lam(x_1/||x||) h: m! / (2^m (lam)_m)."""
    return Fraction(math.factorial(m), 2**m) / poch(Fraction(lam), m)


def one_step_projection_check(k: int, l: int, h: Poly, factor: Fraction | None = None) -> Poly:
    """Residual H(x_1^{k-l} h(x')) - c ||x||^{k-l} C_{k-l}^{(n-2)/2+l}(x_1/||x||) h(x').

    h is given in the n-1 variables x' = (x_2, ..., x_n).  With the default
    factor c = (k-l)! / (2^{k-l} (lam)_{k-l}) the residual is identically zero.
    """
    if not is_harmonic(h):
        raise E.NotHarmonic("h must be harmonic")
    if not h.is_zero() and h.degree != l:
        raise E.BadPolynomialGrading("h must have degree l")
    if not 0 <= l <= k:
        raise E.ValidationError("need 0 <= l <= k")
    n = h.n + 1
    m = k - l
    lam = Fraction(n - 2, 2) + l
    H = h.embed(n, 1)
    lhs = project_H((Poly.var(n, 0) ** m) * H)
    if m == 0:
        return lhs - H
    if lam == 0:
        # n = 2, l = 0: the lam -> 0 limit of C_m^lam / (lam)_m is (2/m!) T_m
        c = Fraction(2, 2**m) if factor is None else Fraction(factor)
        return lhs - homogeneous_chebyshev(n, m, 0) * H * c
    c = one_step_factor(m, lam) if factor is None else Fraction(factor)
    return lhs - homogeneous_gegenbauer(n, m, lam, 0) * H * c


# ---------------------------------------------------------------------------
# heat operator


class HeatExpansion:
    """Precomputed levels Delta^j p / j!, so exp(-Delta/(8 pi y)) p is a cheap sum in y."""

    def __init__(self, p: Poly):
        self.p = p
        self.levels: list[Poly] = []
        cur = p
        j = 0
        while not cur.is_zero():
            self.levels.append(cur * Fraction(1, math.factorial(j)))
            cur = laplacian(cur)
            j += 1
        if not self.levels:
            self.levels = [Poly(p.n)]

    @property
    def is_harmonic(self) -> bool:
        return len(self.levels) <= 1

    def level_values(self, X: np.ndarray) -> np.ndarray:
        """Array (levels, N) of Delta^j p(X)/j!."""
        return np.array([lv(X) for lv in self.levels])

    @staticmethod
    def combine(vals: np.ndarray, y) -> np.ndarray:
        t = -1.0 / (8 * math.pi * y)
        out = np.zeros(vals.shape[1:], dtype=complex)
        for j in reversed(range(vals.shape[0])):
            out = out * t + vals[j]
        return out

    def numeric(self, y: float) -> NumPoly:
        t = -1.0 / (8 * math.pi * y)
        terms: dict[Exp, complex] = {}
        for j, lv in enumerate(self.levels):
            for e, c in lv.terms.items():
                terms[e] = terms.get(e, 0j) + complex(c) * t**j
        return NumPoly(self.p.n, terms)


def heat_operator(p: Poly, y: float) -> NumPoly:
    if y <= 0:
        raise E.DomainError("y must be positive")
    return HeatExpansion(p).numeric(y)


def linear_substitute(p: Poly, A: np.ndarray) -> NumPoly:
    """The polynomial x -> p(A x) with float coefficients (orthonormal change of basis)."""
    A = np.asarray(A, dtype=float)
    n = p.n
    terms: dict[Exp, complex] = {(0,) * n: 0j}
    rows = []
    for i in range(n):
        rows.append({tuple(1 if t == j else 0 for t in range(n)): A[i, j] for j in range(n) if A[i, j] != 0})

    def mul(a, b):
        out: dict[Exp, complex] = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                out[e] = out.get(e, 0j) + c1 * c2
        return out

    terms = {}
    for e, c in p.terms.items():
        m: dict[Exp, complex] = {(0,) * n: complex(c)}
        for i, pw in enumerate(e):
            for _ in range(pw):
                m = mul(m, rows[i])
        for e2, c2 in m.items():
            terms[e2] = terms.get(e2, 0j) + c2
    return NumPoly(n, terms)


def random_poly(n: int, k: int, rng: np.random.Generator, nterms: int = 6, bound: int = 5) -> Poly:
    terms = {}
    for _ in range(nterms):
        cuts = sorted(rng.integers(0, k + 1, size=n - 1).tolist())
        e = [b - a for a, b in zip([0] + cuts, cuts + [k])]
        terms[tuple(e)] = QI(int(rng.integers(-bound, bound + 1)), int(rng.integers(-bound, bound + 1)))
    return Poly(n, terms)


def parse_poly_spec(spec: str, n: int) -> tuple[Poly, MultiIndexKappa | None]:
    """'kappa:12,12' or 'basis:k=2,idx=0' or 'monomial:2,0,1'."""
    kind, _, rest = spec.partition(":")
    kind = kind.strip()
    if kind == "kappa":
        kap = MultiIndexKappa.parse(rest)
        if kap.n != n:
            # pad with zeros on the right when fewer entries are given
            ent = list(kap.entries) + [0] * (n - 1 - len(kap.entries))
            if len(ent) != n - 1:
                raise E.ValidationError(f"kappa needs {n - 1} entries for dimension {n}")
            kap = MultiIndexKappa(tuple(ent), kap.sign)
        return vilenkin(kap), kap
    if kind == "basis":
        kv = dict(t.split("=") for t in rest.split(","))
        k, idx = int(kv["k"]), int(kv.get("idx", 0))
        basis = vilenkin_basis(n, k)
        if not 0 <= idx < len(basis):
            raise E.ValidationError("basis index out of range")
        kap, p = basis[idx]
        return p, kap
    if kind == "monomial":
        e = tuple(int(t) for t in rest.split(","))
        if len(e) != n:
            raise E.ValidationError("monomial exponent has wrong length")
        return Poly(n, {e: 1}), None
    if kind == "one":
        return Poly.const(n, 1), None
    raise E.ValidationError(f"unknown polynomial spec {spec!r}")
