"""Exact integer and rational linear algebra used by the lattice code.

Matrices are plain lists of lists holding ``int`` or ``Fraction`` entries.
Nothing here is performance critical; sizes are at most a dozen.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from typing import Iterable, Sequence

Rat = Fraction
Matrix = list[list]


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        if not x.is_integer():
            raise TypeError(f"refusing to coerce non-integral float {x!r} to a rational")
        return Fraction(int(x))
    return Fraction(x)


def fvec(v: Iterable) -> tuple[Fraction, ...]:
    return tuple(as_fraction(x) for x in v)


def frac_part(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


def reduce_mod1(v: Sequence[Fraction]) -> tuple[Fraction, ...]:
    return tuple(frac_part(Fraction(x)) for x in v)


def is_integral(v: Iterable) -> bool:
    return all(Fraction(x).denominator == 1 for x in v)


def common_denominator(v: Iterable[Fraction]) -> int:
    d = 1
    for x in v:
        d = math.lcm(d, Fraction(x).denominator)
    return d


def identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def transpose(a: Matrix) -> Matrix:
    return [list(r) for r in zip(*a)] if a else []


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matvec(a: Matrix, v: Sequence) -> list:
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def dot(u: Sequence, v: Sequence):
    return sum(x * y for x, y in zip(u, v))


def bilinear(gram: Matrix, x: Sequence, y: Sequence):
    return dot(x, matvec(gram, y))


def det(a: Matrix) -> Fraction:
    """Determinant by fraction-exact elimination."""
    n = len(a)
    m = [[Fraction(x) for x in row] for row in a]
    sign = 1
    out = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            sign = -sign
        out *= m[c][c]
        for r in range(c + 1, n):
            if m[r][c]:
                f = m[r][c] / m[c][c]
                for j in range(c, n):
                    m[r][j] -= f * m[c][j]
    return sign * out


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        m[c], m[piv] = m[piv], m[c]
        p = m[c][c]
        m[c] = [x / p for x in m[c]]
        for r in range(n):
            if r != c and m[r][c]:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [row[n:] for row in m]


def solve(a: Matrix, b: Sequence) -> list[Fraction]:
    """Solve a x = b for square nonsingular a."""
    return matvec(inverse(a), [Fraction(x) for x in b])


def solve_in_span(rows: Matrix, x: Sequence) -> list[Fraction]:
    """Coordinates c with sum_i c_i rows[i] = x, for linearly independent rows.

    Raises ValueError if x is not in the rational span.
    """
    if not rows:
        if any(Fraction(t) != 0 for t in x):
            raise ValueError("vector not in span of empty family")
        return []
    r = len(rows)
    g = [[dot(rows[i], rows[j]) for j in range(r)] for i in range(r)]
    rhs = [dot(rows[i], x) for i in range(r)]
    c = solve(g, rhs)
    back = [sum(c[i] * rows[i][j] for i in range(r)) for j in range(len(x))]
    if any(Fraction(bj) != Fraction(xj) for bj, xj in zip(back, x)):
        raise ValueError("vector not in span")
    return c


def rank(a: Matrix) -> int:
    if not a:
        return 0
    m = [[Fraction(x) for x in row] for row in a]
    rows, cols = len(m), len(m[0])
    rk = 0
    for c in range(cols):
        piv = next((r for r in range(rk, rows) if m[r][c] != 0), None)
        if piv is None:
            continue
        m[rk], m[piv] = m[piv], m[rk]
        for r in range(rows):
            if r != rk and m[r][c]:
                f = m[r][c] / m[rk][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[rk])]
        rk += 1
    return rk


def ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a x + b y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def smith_normal_form(a: Matrix) -> tuple[Matrix, Matrix, Matrix]:
    """Return (U, D, V) with U a V = D diagonal, U and V unimodular.

    The diagonal entries are nonnegative and satisfy d_1 | d_2 | ...
    """
    m = [[int(x) for x in row] for row in a]
    nr, nc = len(m), len(m[0]) if m else 0
    U = identity(nr)
    V = identity(nc)

    def swap_rows(i, j):
        m[i], m[j] = m[j], m[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in m:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, f):  # row dst += f * row src
        m[dst] = [x + f * y for x, y in zip(m[dst], m[src])]
        U[dst] = [x + f * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, f):
        for row in m:
            row[dst] += f * row[src]
        for row in V:
            row[dst] += f * row[src]

    def combine_rows(i, j, c):
        # replace rows (i, j) by unimodular combination making m[i][c] = gcd, m[j][c] = 0
        a_, b_ = m[i][c], m[j][c]
        g, x, y = ext_gcd(a_, b_)
        p, q = a_ // g, b_ // g
        for mat in (m, U):
            ri, rj = mat[i], mat[j]
            mat[i] = [x * s + y * t for s, t in zip(ri, rj)]
            mat[j] = [-q * s + p * t for s, t in zip(ri, rj)]

    def combine_cols(i, j, r):
        a_, b_ = m[r][i], m[r][j]
        g, x, y = ext_gcd(a_, b_)
        p, q = a_ // g, b_ // g
        for mat in (m, V):
            for row in mat:
                ci, cj = row[i], row[j]
                row[i] = x * ci + y * cj
                row[j] = -q * ci + p * cj

    t = 0
    while t < min(nr, nc):
        # pick a nonzero pivot of minimal absolute value in the remaining block
        best = None
        for i in range(t, nr):
            for j in range(t, nc):
                if m[i][j] and (best is None or abs(m[i][j]) < abs(m[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            changed = False
            for i in range(t + 1, nr):
                if m[i][t]:
                    if m[i][t] % m[t][t] == 0:
                        add_row(i, t, -(m[i][t] // m[t][t]))
                    else:
                        combine_rows(t, i, t)
                    changed = True
            for j in range(t + 1, nc):
                if m[t][j]:
                    if m[t][j] % m[t][t] == 0:
                        add_col(j, t, -(m[t][j] // m[t][t]))
                    else:
                        combine_cols(t, j, t)
                    changed = True
            if not changed:
                # enforce divisibility of the rest of the block
                bad = None
                for i in range(t + 1, nr):
                    for j in range(t + 1, nc):
                        if m[i][j] % m[t][t]:
                            bad = (i, j)
                            break
                    if bad:
                        break
                if bad is None:
                    break
                add_row(t, bad[0], 1)
        if m[t][t] < 0:
            m[t] = [-x for x in m[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return U, m, V


def integer_kernel(a: Matrix, ncols: int | None = None) -> Matrix:
    """Basis (as rows) of {x in Z^n : a x = 0}, in Hermite-reduced form."""
    if not a:
        n = ncols or 0
        return identity(n)
    n = len(a[0])
    U, D, V = smith_normal_form(a)
    r = sum(1 for i in range(min(len(D), n)) if D[i][i] != 0)
    cols = [[V[i][j] for i in range(n)] for j in range(r, n)]
    return hermite_rows(cols)


def hermite_rows(rows: Matrix) -> Matrix:
    """Row-style Hermite normal form of an integer row basis (canonical up to the lattice)."""
    m = [[int(x) for x in r] for r in rows]
    if not m:
        return []
    nr, nc = len(m), len(m[0])
    r = 0
    for c in range(nc):
        if r >= nr:
            break
        # gcd-combine column c below row r
        for i in range(r + 1, nr):
            if m[i][c]:
                a_, b_ = m[r][c], m[i][c]
                g, x, y = ext_gcd(a_, b_)
                p, q = a_ // g, b_ // g
                rr, ri = m[r], m[i]
                m[r] = [x * s + y * t for s, t in zip(rr, ri)]
                m[i] = [-q * s + p * t for s, t in zip(rr, ri)]
        if m[r][c] == 0:
            continue
        if m[r][c] < 0:
            m[r] = [-x for x in m[r]]
        for i in range(r):
            f = m[i][c] // m[r][c]
            if f:
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
    return [row for row in m if any(row)]


# exact-angle phases -------------------------------------------------------

def expi(r) -> complex:
    """e(r) = exp(2 pi i r) for rational r, reduced exactly modulo 1 first.

    Multiples of 1/8 return values whose real/imaginary parts are exact
    to the last bit (0, +-1, +-sqrt(1/2)).
    """
    r = frac_part(Fraction(r))
    eighths = r * 8
    if eighths.denominator == 1:
        return _EIGHTHS[int(eighths)]
    return cmath.exp(2j * math.pi * float(r))


_S = math.sqrt(0.5)
_EIGHTHS = [1 + 0j, complex(_S, _S), 1j, complex(-_S, _S), -1 + 0j, complex(-_S, -_S), -1j, complex(_S, -_S)]


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"
