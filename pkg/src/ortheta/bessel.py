"""Archimedean data along the isotropic parabolic: section values, the kernels J, their inverse Fourier transforms."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gamma as Gamma

from . import errors as E
from .harmonic import MultiIndexKappa, gegenbauer, vilenkin
from .special import appell_F4, gauss_2F1, kv


@dataclass(frozen=True)
class SectionPoint:
    """u in V1 = R^{b+-1, b--1}; the first b+-1 coordinates are u+."""

    u: tuple
    b_plus: int
    b_minus: int

    def __post_init__(self):
        if len(self.u) != self.b_plus + self.b_minus - 2:
            raise E.ValidationError(f"u must have {self.b_plus + self.b_minus - 2} coordinates")

    @property
    def u_plus(self) -> np.ndarray:
        return np.asarray(self.u[: self.b_plus - 1], dtype=float)

    @property
    def u_minus(self) -> np.ndarray:
        return np.asarray(self.u[self.b_plus - 1 :], dtype=float)

    @property
    def Q(self) -> float:
        return 0.5 * (self.u_plus @ self.u_plus - self.u_minus @ self.u_minus)

    @property
    def tau(self) -> float:
        return math.sqrt((1 - self.Q / 2) ** 2 + self.u_plus @ self.u_plus)

    def tau_defect(self) -> float:
        """|tau^2 - ((1 + Q/2)^2 + ||u-||^2)|."""
        a = (1 - self.Q / 2) ** 2 + self.u_plus @ self.u_plus
        b = (1 + self.Q / 2) ** 2 + self.u_minus @ self.u_minus
        return abs(a - b)


def _check_kappa(kappa: MultiIndexKappa, b_plus: int):
    if b_plus < 2:
        raise E.ValidationError("b+ must be at least 2")
    if kappa.n != b_plus:
        raise E.ValidationError(f"kappa needs {b_plus - 1} entries for b+ = {b_plus}")


def section_value(pt: SectionPoint, kappa: MultiIndexKappa, bare: bool = False) -> complex:
    """f(w n0(u); h_kappa) in closed form.

    For b+ > 2 the closed form agrees with the matrix evaluation after a factor (-1)^{k1};
    bare=True omits that factor and, for b+ = 2, flips the sign of the imaginary part.
    """
    bp = pt.b_plus
    _check_kappa(kappa, bp)
    k = kappa.k
    if bp == 2:
        if bare:
            return complex((1 - pt.Q / 2 - kappa.sign * 1j * pt.u_plus[0]) ** (-k))
        return complex((1 - pt.Q / 2 + kappa.sign * 1j * pt.u_plus[0]) ** (-k))
    k1 = kappa.k1
    tau = pt.tau
    h = complex(vilenkin(kappa.tail())(pt.u_plus[None, :])[0])
    c = float(gegenbauer(k - k1, k1 + (bp - 2) / 2, (1 - pt.Q / 2) / tau))
    val = h / tau ** (k + k1 + bp - 2) * c
    return val if bare else (-1) ** k1 * val


def section_matrix(pt: SectionPoint, kappa: MultiIndexKappa) -> complex:
    """f(g; h) = h(x+) ||x+||^{-2k-b++2}, x = g^{-1} z0, g = w n0(u), through explicit matrices on R^{b+,b-}."""
    bp, bm = pt.b_plus, pt.b_minus
    _check_kappa(kappa, bp)
    b = bp + bm
    k = kappa.k
    E_ = np.eye(b)
    J = np.diag([1.0] * bp + [-1.0] * bm)
    z0 = (E_[0] + E_[b - 1]) / 2
    zs = E_[0] - E_[b - 1]
    U = np.zeros(b)
    U[1 : b - 1] = pt.u
    Q = 0.5 * U @ J @ U
    P = np.array([z0, zs] + [E_[i] for i in range(1, b - 1)]).T
    n0 = np.array([z0, -Q * z0 + U + zs] + [E_[i] - (U @ J @ E_[i]) * z0 for i in range(1, b - 1)]).T @ np.linalg.inv(P)
    w = np.array([zs, z0] + [E_[i] for i in range(1, b - 1)]).T @ np.linalg.inv(P)
    x = np.linalg.solve(w @ n0, z0)[:bp]
    h = complex(vilenkin(kappa)(x[None, :])[0])
    return h * float(np.linalg.norm(x)) ** (-2 * k - bp + 2)


# ---------------------------------------------------------------------------
# kernels


def J_kernel(lam_plus: np.ndarray, lam_minus: np.ndarray, kappa: MultiIndexKappa, b_plus: int, b_minus: int) -> np.ndarray:
    """J^kappa on V1 (b+ > 2): char(Q > 0) (lam, lam)^A h(lam+)/||lam+||^{k1+(b+-3)/2} K(4 pi ||lam+||)."""
    lp = np.atleast_2d(lam_plus)
    lm = np.atleast_2d(lam_minus) if b_minus > 1 else np.zeros((lp.shape[0], 0))
    A = kappa.k + (b_plus - b_minus) / 2 - 1
    nu = kappa.k1 + (b_plus - 3) / 2
    rp = np.linalg.norm(lp, axis=1)
    n2 = rp**2 - (lm**2).sum(1)
    out = np.zeros(len(rp), dtype=complex)
    ok = (n2 > 0) & (rp > 0)
    h = vilenkin(kappa.tail())
    out[ok] = n2[ok] ** A * h(lp[ok]) / rp[ok] ** nu * kv(nu, 4 * math.pi * rp[ok])
    return out


def J2_closed(lam1, lam_minus, k: int, sign: int, b_minus: int) -> np.ndarray:
    """J^{+-k} for b+ = 2: 2^{k-3/2} i^k char(Q > 0, +-lam1 < 0) ||lam||^{2k-b-} exp(4 pi (+-lam1))."""
    l1 = np.atleast_1d(np.asarray(lam1, dtype=float))
    lm = np.asarray(lam_minus, dtype=float).reshape(len(l1), -1) if b_minus > 1 else np.zeros((len(l1), 0))
    n2 = l1**2 - (lm**2).sum(1)
    out = np.zeros(len(l1), dtype=complex)
    ok = (n2 > 0) & (sign * l1 < 0)
    out[ok] = 2 ** (k - 1.5) * 1j**k * n2[ok] ** ((2 * k - b_minus) / 2) * np.exp(4 * math.pi * sign * l1[ok])
    return out


def J2_sum(lam1, lam_minus, k: int, sign: int, b_minus: int) -> np.ndarray:
    """The finite double sum of half-integer K-Bessel terms defining J^{+-k}."""
    l1 = np.atleast_1d(np.asarray(lam1, dtype=float))
    lm = np.asarray(lam_minus, dtype=float).reshape(len(l1), -1) if b_minus > 1 else np.zeros((len(l1), 0))
    n2 = l1**2 - (lm**2).sum(1)
    rp = np.abs(l1)
    out = np.zeros(len(l1), dtype=complex)
    ok = (n2 > 0) & (rp > 0)
    r, x, norm = rp[ok], sign * 1j * l1[ok], n2[ok] ** ((2 * k - b_minus) / 2)
    s = np.zeros(len(r), dtype=complex)
    for h in range(k + 1):
        for j in range((k - h) // 2 + 1):
            nu = k - h - j - 0.5
            c = math.comb(k, h) * (-1j) ** h * math.factorial(k - h) / ((8 * math.pi) ** j * math.factorial(j) * math.factorial(k - h - 2 * j))
            s += c * x ** (k - h - 2 * j) / r**nu * kv(nu, 4 * math.pi * r)
    out[ok] = (-1) ** k * norm * s
    return out


# ---------------------------------------------------------------------------
# inverse Fourier transforms


def _check_u(u, b_plus: int, b_minus: int) -> SectionPoint:
    return u if isinstance(u, SectionPoint) else SectionPoint(tuple(float(x) for x in u), b_plus, b_minus)


def I_closed(u, kappa: MultiIndexKappa, b_plus: int, b_minus: int) -> complex:
    """Closed-form inverse transform of J (F4 for b- > 1, 2F1 for b- = 1, elementary for b+ = 2)."""
    pt = _check_u(u, b_plus, b_minus)
    _check_kappa(kappa, b_plus)
    if b_minus < 1:
        raise E.ValidationError("b- must be at least 1")
    k = kappa.k
    if b_plus == 2:
        c = 1j**k * Gamma(k) * Gamma(k - b_minus / 2 + 1) / (2 ** (k + 2.5) * math.pi ** (2 * k - b_minus / 2 + 1))
        return complex(c * (1 - pt.Q / 2 + kappa.sign * 1j * pt.u_plus[0]) ** (-k))
    k1 = kappa.k1
    bp, bm = b_plus, b_minus
    h = complex(vilenkin(kappa.tail())(pt.u_plus[None, :])[0])
    up2 = float(pt.u_plus @ pt.u_plus)
    if bm == 1:
        c = 1j**k1 * Gamma(k + k1 + bp - 2) * Gamma(k + (bp - 1) / 2) / (
            2 ** (k1 + (bp + 1) / 2) * (2 * math.pi) ** (2 * k + bp - 2) * Gamma(k1 + (bp - 1) / 2)
        )
        F = gauss_2F1(k + k1 + bp - 2, k + (bp - 1) / 2, k1 + (bp - 1) / 2, -up2 / 4).value
        return complex(c * h * F)
    um2 = float(pt.u_minus @ pt.u_minus)
    c = 1j**k1 * Gamma(k + k1 + bp - 2) * Gamma(k + (bp - bm) / 2) / (
        2 ** (k1 + (bp + bm) / 2) * (2 * math.pi) ** (2 * k + bp - (bm + 3) / 2) * Gamma(k1 + (bp - 1) / 2)
    )
    F = appell_F4(k + (bp - 1) / 2, k + k1 + bp - 2, k + (bp - 1) / 2, k1 + (bp - 1) / 2, -um2 / 4, -up2 / 4).value
    return complex(c * h * F)


def proportionality_constant(kappa: MultiIndexKappa, b_plus: int, b_minus: int) -> complex:
    """I = const * (bare section value)."""
    k = kappa.k
    if b_plus == 2:
        return 1j**k * Gamma(k) * Gamma(k - b_minus / 2 + 1) / (2 ** (k + 2.5) * math.pi ** (2 * k - b_minus / 2 + 1))
    k1, bp, bm = kappa.k1, b_plus, b_minus
    return (
        1j**k1
        * Gamma(k - k1 + 1)
        * Gamma(2 * k1 + bp - 2)
        * Gamma(k + (bp - bm) / 2)
        / (2 ** (k1 + (bp + bm) / 2) * (2 * math.pi) ** (2 * k + bp - (bm + 3) / 2) * Gamma(k1 + (bp - 1) / 2))
    )


def _radial(T: float, panels: int, order: int):
    g, w = leggauss(order)
    e = np.linspace(0.0, T, panels + 1)
    t = np.concatenate([(b - a) / 2 * g + (a + b) / 2 for a, b in zip(e[:-1], e[1:])])
    wt = np.concatenate([(b - a) / 2 * w for a, b in zip(e[:-1], e[1:])])
    return t, wt


def _sphere(d: int, n: int):
    """Nodes and weights on the unit sphere of R^d (d <= 3)."""
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d == 2:
        th = 2 * math.pi * np.arange(n) / n
        return np.column_stack([np.cos(th), np.sin(th)]), np.full(n, 2 * math.pi / n)
    if d == 3:
        g, w = leggauss(n // 2)
        ph = 2 * math.pi * np.arange(n) / n
        C, P = np.meshgrid(g, ph, indexing="ij")
        S = np.sqrt(1 - C**2)
        pts = np.column_stack([(S * np.cos(P)).ravel(), (S * np.sin(P)).ravel(), C.ravel()])
        ww = (w[:, None] * np.full(n, 2 * math.pi / n)[None, :]).ravel()
        return pts, ww
    raise E.DimensionTooLarge("sphere rules only up to dimension 3")  # pragma: no cover


@dataclass(frozen=True)
class QuadratureValue:
    value: complex
    error_estimate: float
    nodes: int


def I_quadrature(u, kappa: MultiIndexKappa, b_plus: int, b_minus: int, T: float = 12.0, panels: int = 24, order: int = 24, angles: int = 128, s_nodes: int = 48) -> QuadratureValue:
    """int over V1 of e((lam, u)) J(lam) d lam, with lam+ = t sigma+, lam- = s t sigma-, 0 <= s < 1."""
    pt = _check_u(u, b_plus, b_minus)
    _check_kappa(kappa, b_plus)
    p, m = b_plus - 1, b_minus - 1
    if p + m > 3:
        raise E.DimensionTooLarge(f"dim V1 = {p + m} > 3")

    def run(order_, s_nodes, angles):
        t, wt = _radial(T, panels, order_)
        sp, wsp = _sphere(p, angles)
        up, um = pt.u_plus, pt.u_minus
        tot = 0j
        if m == 0:
            for ti, wi in zip(t, wt):
                lp = ti * sp
                Jv = _J_any(lp, np.zeros((len(lp), 0)), kappa, b_plus, b_minus)
                tot += wi * ti ** (p - 1) * np.sum(wsp * Jv * np.exp(2j * math.pi * (lp @ up)))
            return tot
        gs, ws = leggauss(s_nodes)
        s = (gs + 1) / 2
        wss = ws / 2
        sm, wsm = _sphere(m, angles)
        # all (s, sigma-) pairs at once; d lam = t^{p-1} dt dsigma+ (s t)^{m-1} t ds dsigma-
        S = np.repeat(s, len(sm))
        SM = np.tile(sm, (len(s), 1))
        WM = np.repeat(wss * s ** (m - 1), len(sm)) * np.tile(wsm, len(s))
        for ti, wi in zip(t, wt):
            lp = ti * sp
            lm = (S * ti)[:, None] * SM
            php = wsp * np.exp(2j * math.pi * (lp @ up))
            phm = WM * np.exp(-2j * math.pi * (lm @ um))
            LP = np.repeat(lp, len(lm), axis=0)
            LM = np.tile(lm, (len(lp), 1))
            Jv = _J_any(LP, LM, kappa, b_plus, b_minus).reshape(len(lp), len(lm))
            tot += wi * ti ** (p - 1) * ti ** (m - 1) * ti * (php @ Jv @ phm)
        return tot

    v = run(order, s_nodes, angles)
    v2 = run(max(order - 8, 8), max(s_nodes * 2 // 3, 8), max(angles * 3 // 4, 8))
    return QuadratureValue(complex(v), abs(v - v2), panels * order)


def _J_any(lp, lm, kappa, b_plus, b_minus):
    if b_plus == 2:
        return J2_closed(lp[:, 0], lm, kappa.k, kappa.sign, b_minus)
    return J_kernel(lp, lm, kappa, b_plus, b_minus)


def proportionality_check(samples: Sequence[Sequence[float]], kappa: MultiIndexKappa, b_plus: int, b_minus: int, tol: float = 1e-6) -> dict:
    """Ratios I_closed(u) / (bare section value) across samples, against the stated constant."""
    const = proportionality_constant(kappa, b_plus, b_minus)
    ratios = []
    for u in samples:
        pt = _check_u(u, b_plus, b_minus)
        ratios.append(I_closed(pt, kappa, b_plus, b_minus) / section_value(pt, kappa, bare=b_plus > 2))
    ratios = np.array(ratios)
    spread = float(np.max(np.abs(ratios - ratios[0])) / abs(ratios[0])) if len(ratios) else 0.0
    dev = float(np.max(np.abs(ratios / const - 1))) if len(ratios) else 0.0
    return {
        "b_plus": b_plus,
        "b_minus": b_minus,
        "kappa": str(kappa),
        "constant": [const.real, const.imag],
        "ratios": [[r.real, r.imag] for r in ratios],
        "spread": spread,
        "deviation_from_constant": dev,
        "passed": spread < tol and dev < tol,
    }


def sample_points(b_plus: int, b_minus: int, n: int, rng: np.random.Generator, radius: float = 0.8) -> list[tuple]:
    """Points inside the F4 convergence domain (||u+|| + ||u-|| < 2 radius)."""
    d = b_plus + b_minus - 2
    out = []
    while len(out) < n:
        v = rng.uniform(-radius, radius, d)
        pt = SectionPoint(tuple(v), b_plus, b_minus)
        if math.sqrt(pt.u_plus @ pt.u_plus) + math.sqrt(pt.u_minus @ pt.u_minus) < 2 * radius:
            out.append(tuple(float(x) for x in v))
    return out


def kernel_consistency(ctx, lams: np.ndarray, kappa: MultiIndexKappa, elements: Sequence, tol: float = 1e-6) -> dict:
    """W_lambda(n(u=0) m(a, g1)) (lam, lam)^A |a|^{k - b-} / J^kappa(a v1(g1^-1 lam) / (2 ||v0+(z)||)).

    ctx is a lift.LiftContext; elements are ParabolicElements with u = 0.
    The ratio must not depend on lambda, a or g1.
    """
    from .lift import W_values

    L = ctx.L
    bp, bm = L.b_plus, L.b_minus
    lams = np.atleast_2d(np.asarray(lams, dtype=float))
    n2 = np.einsum("ij,jk,ik->i", lams, ctx.G1, lams)
    if np.any(n2 <= 0):
        raise E.ValidationError("lambda must satisfy q(lambda) > 0")
    A = kappa.k + (bp - bm) / 2 - 1
    r = len(ctx.split.L1_basis)
    ratios = []
    for gz in elements:
        if any(float(x) for x in gz.u):
            raise E.ValidationError("elements must have u = 0")
        g1 = np.eye(r) if gz.g1 is None else gz.g1_matrix(r)
        W = W_values(ctx, lams, kappa, gz)
        mu = abs(gz.a) * ctx.v1(lams @ np.linalg.inv(g1).T) / (2 * ctx.znorm)
        J = J_kernel(mu[:, : bp - 1], mu[:, bp - 1 :], kappa, bp, bm)
        ratios.extend(W * n2**A * abs(gz.a) ** (kappa.k - bm) / J)
    ratios = np.array(ratios)
    spread = float(np.max(np.abs(ratios / ratios[0] - 1)))
    return {"constant": [ratios[0].real, ratios[0].imag], "spread": spread, "samples": len(ratios), "passed": spread < tol}
