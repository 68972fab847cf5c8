"""Truncated Siegel theta kernels with polynomial weights and their modular transformation."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special as sps

from . import errors as E
from .harmonic import HeatExpansion, Poly
from .lattice import DiscriminantForm, EvenLattice, Isometry, discriminant_group, enumerate_coset, is_orthogonal
from .qmath import expi
from .weil import rho_S, rho_T


@dataclass(frozen=True)
class ThetaValue:
    values: dict
    radius: float
    tail: float
    points: int

    def vector(self, keys) -> np.ndarray:
        return np.array([self.values[k] for k in keys], dtype=complex)


def _split_tau(tau) -> tuple[object, float]:
    """Return (x, y) keeping x exact when it is given as a Fraction."""
    if isinstance(tau, tuple):
        x, y = tau
        return x, float(y)
    tau = complex(tau)
    return tau.real, tau.imag


def _poly_bound(p: Poly) -> float:
    return sum(abs(complex(c)) for c in p.terms.values())


def gaussian_tail(b: int, covol: float, cell_radius: float, R: float, y: float, deg: int, coef: float) -> float:
    """Bound for sum over points with majorant norm > R of coef * r^deg * exp(-pi y r^2)."""
    s = b + deg
    R0 = max(R - cell_radius, 0.0)
    a = math.pi * y
    area = 2 * math.pi ** (b / 2) / math.gamma(b / 2)
    # int_{R0}^inf (r + rho)^{s-1} e^{-a r^2} dr <= 2^{s-2} [I(s-1) + rho^{s-1} I(0)] with I(j) the incomplete moments
    def moment(j):
        return sps.gammaincc((j + 1) / 2, a * R0 * R0) * math.gamma((j + 1) / 2) / (2 * a ** ((j + 1) / 2))

    rho = cell_radius
    integral = 2 ** max(s - 2, 0) * (moment(s - 1) + rho ** (s - 1) * moment(0))
    return coef * area / covol * integral


def _check_g(L: EvenLattice, g) -> np.ndarray:
    if g is None:
        return np.eye(L.rank)
    g = np.asarray(g, dtype=float)
    if g.shape != (L.rank, L.rank) or not is_orthogonal(L.gram, g):
        raise E.NotInOrthogonalGroup("g does not preserve the Gram matrix")
    return g


class ThetaKernel:
    """Precomputed lattice data for repeated theta evaluations at fixed (g, alpha, beta, p, R)."""

    def __init__(self, L: EvenLattice, v0: Isometry, p: Poly, R: float, g=None, alpha=None, beta=None, D: DiscriminantForm | None = None):
        if p.n != L.b_plus:
            raise E.BadPolynomialGrading(f"p must be a polynomial in the {L.b_plus} positive variables")
        if not p.is_zero():
            _ = p.degree  # raises for inhomogeneous input
        self.L, self.v0, self.p, self.R = L, v0, p, R
        self.D = D or discriminant_group(L)
        g = _check_g(L, g)
        self.iso = v0.compose(np.linalg.inv(g))
        self.alpha = None if alpha is None else np.asarray(alpha, dtype=float)
        self.beta = None if beta is None else np.asarray(beta, dtype=float)
        self.heat = HeatExpansion(p)
        self.blocks = []
        G = L.gram_np
        for key in self.D.coset_reps:
            pts = enumerate_coset(L, key, self.iso, R)
            lam = pts.as_float()
            x = lam if self.beta is None else lam + self.beta[None, :]
            V = self.iso(x)
            vp, vm = V[:, : L.b_plus], V[:, L.b_plus :]
            qp = 0.5 * (vp**2).sum(1)
            qm = -0.5 * (vm**2).sum(1)
            if self.beta is None:
                qex = pts.q_numerators(L)
                qden = 2 * pts.den * pts.den
            else:
                qex, qden = None, None
            if self.alpha is None:
                aph = np.zeros(len(lam))
            else:
                aph = -((lam + (0 if self.beta is None else 0.5 * self.beta[None, :])) @ G @ self.alpha)
            levels = self.heat.level_values(vp) if len(lam) else np.zeros((len(self.heat.levels), 0))
            self.blocks.append((key, qp, qm, qex, qden, aph, levels))
        self.npoints = sum(len(b[1]) for b in self.blocks)
        M = self.iso.matrix
        self.covol = math.sqrt(abs(L.det))
        self.cell_radius = 0.5 * math.sqrt(float(np.trace(M.T @ M)))
        self.deg = 0 if p.is_zero() else p.degree

    def tail(self, y: float) -> float:
        coef = sum(_poly_bound(lv) * (1 / (8 * math.pi * y)) ** j for j, lv in enumerate(self.heat.levels))
        return y ** (self.L.b_minus / 2) * gaussian_tail(self.L.rank, self.covol, self.cell_radius, self.R, y, self.deg, coef)

    def evaluate(self, tau) -> ThetaValue:
        x, y = _split_tau(tau)
        if not y > 0:
            raise E.DomainError("Im(tau) must be positive")
        out = {}
        xf = float(x)
        for key, qp, qm, qex, qden, aph, levels in self.blocks:
            if len(qp) == 0:
                out[key] = 0j
                continue
            poly = HeatExpansion.combine(levels, y)
            decay = np.exp(-2 * math.pi * y * (qp - qm))
            if qex is not None and isinstance(x, Fraction):
                # exact phase e(x q) grouped by the exact value of q
                uq, inv = np.unique(qex, return_inverse=True)
                ph = np.array([expi(x * Fraction(int(t), qden)) for t in uq])[inv]
            else:
                ph = np.exp(2j * math.pi * xf * (qp + qm))
            if np.any(aph):
                ph = ph * np.exp(2j * math.pi * aph)
            out[key] = complex(y ** (self.L.b_minus / 2) * np.sum(poly * decay * ph))
        return ThetaValue(out, self.R, self.tail(y), self.npoints)


def theta_coset(L, v0, gamma, tau, g=None, alpha=None, beta=None, p: Poly | None = None, R: float = 6.0) -> complex:
    p = Poly.const(L.b_plus, 1) if p is None else p
    if p.is_zero():
        return 0j
    D = discriminant_group(L)
    key = D.reduce(gamma)
    tk = ThetaKernel(L, v0, p, R, g, alpha, beta, D)
    return tk.evaluate(tau).values[key]


def theta_full(L, v0, tau, g=None, p: Poly | None = None, R: float = 6.0, alpha=None, beta=None) -> ThetaValue:
    p = Poly.const(L.b_plus, 1) if p is None else p
    return ThetaKernel(L, v0, p, R, g, alpha, beta).evaluate(tau)


def _principal_power(tau: complex, e: Fraction) -> complex:
    return cmath.exp(float(e) * cmath.log(tau))


def check_transformation(L, v0, tau, g=None, p: Poly | None = None, which: str = "T", R: float = 8.0, tol: float = 1e-6, alpha=None, beta=None) -> dict:
    """Compare Theta(M tau; (a alpha + b beta, c alpha + d beta)) with phi^{2k+sig} rho(M) Theta(tau; (alpha, beta))."""
    p = Poly.const(L.b_plus, 1) if p is None else p
    k = 0 if p.is_zero() else p.degree
    D = discriminant_group(L)
    keys = D.coset_reps
    b = L.rank
    al = np.zeros(b) if alpha is None else np.asarray(alpha, dtype=float)
    be = np.zeros(b) if beta is None else np.asarray(beta, dtype=float)
    has_shift = alpha is not None or beta is not None
    x, y = _split_tau(tau)
    base = ThetaKernel(L, v0, p, R, g, al if has_shift else None, be if has_shift else None, D)
    th = base.evaluate(tau)
    if which == "T":
        a2, b2 = al + be, be
        new_tau = (x + 1, y) if isinstance(x, Fraction) else complex(float(x) + 1, y)
        rho = rho_T(D).matrix
        factor = 1.0
    elif which == "S":
        a2, b2 = -be, al
        t = complex(float(x), y)
        new_tau = -1 / t
        rho = rho_S(D).matrix
        factor = _principal_power(t, Fraction(2 * k + L.sig, 2))
    else:
        raise E.ValidationError("which must be 'T' or 'S'")
    moved = ThetaKernel(L, v0, p, R, g, a2 if has_shift else None, b2 if has_shift else None, D)
    lhs = moved.evaluate(new_tau).vector(keys)
    rhs = factor * (rho @ th.vector(keys))
    scale = max(1.0, float(np.max(np.abs(rhs))))
    defect = float(np.max(np.abs(lhs - rhs))) / scale
    _, ny = _split_tau(new_tau) if not isinstance(new_tau, complex) else (None, new_tau.imag)
    tail = (max(th.tail * abs(factor), moved.tail(ny))) / scale
    report = {"which": which, "defect": defect, "tail_estimate": tail, "tolerance": tol, "passed": defect < tol, "points": th.points}
    if defect >= tol and tail >= tol:
        raise E.TruncationInsufficient(f"defect {defect:.3g} with tail estimate {tail:.3g} exceeds tol {tol:g}; increase R")
    return report
