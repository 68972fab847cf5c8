"""Brute-force Petersson pairing of a cusp form against the Siegel theta kernel over a truncated fundamental domain."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import errors as E
from .harmonic import HeatExpansion, Poly
from .lattice import EvenLattice, Isometry, discriminant_group, enumerate_coset, is_orthogonal
from .modform import CuspFormCoeffs

SQ3_2 = math.sqrt(3) / 2


@dataclass(frozen=True)
class DomainGrid:
    """Quadrature nodes (x, y) with weights for dx dy over {|x| <= 1/2, |tau| >= 1, y <= y_max}."""

    y_max: float
    nx: int
    ny: int
    rule: str
    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    candidates: int

    def __len__(self) -> int:
        return len(self.w)

    def coarsen(self) -> "DomainGrid":
        return make_grid(self.y_max, max(self.nx // 2, 4), max(self.ny // 2, 4), self.rule)


def _clipped_area(x0: float, x1: float, y0: float, y1: float) -> float:
    """Area of [x0,x1] x [y0,y1] above the unit circle."""
    # integrand y1 - clamp(sqrt(1-x^2), y0, y1), integrated exactly on monotone pieces by Gauss-Legendre
    g, w = leggauss(32)
    xs = x0 + (g + 1) / 2 * (x1 - x0)
    lo = np.clip(np.sqrt(np.maximum(1 - xs * xs, 0.0)), y0, y1)
    return float(np.sum(w * (y1 - lo)) * (x1 - x0) / 2)


def _midpoint_grid(y_max: float, nx: int, ny: int):
    hx = 1.0 / nx
    hy = (y_max - SQ3_2) / ny
    xs, ys, ws = [], [], []
    for i in range(nx):
        x0 = -0.5 + i * hx
        x1 = x0 + hx
        xm = x0 + hx / 2
        for j in range(ny):
            y0 = SQ3_2 + j * hy
            y1 = y0 + hy
            # the circle is lowest over the cell at the endpoint farthest from 0
            xfar = max(abs(x0), abs(x1))
            xnear = 0.0 if x0 < 0 < x1 else min(abs(x0), abs(x1))
            if y0 * y0 + xfar * xfar >= 1:
                xs.append(xm)
                ys.append(y0 + hy / 2)
                ws.append(hx * hy)
                continue
            if y1 * y1 + xnear * xnear <= 1:
                continue  # entirely below the arc
            area = _clipped_area(x0, x1, y0, y1)
            if area <= 0:
                continue
            ylo = max(y0, math.sqrt(max(1 - xm * xm, 0.0)))
            xs.append(xm)
            ys.append((ylo + y1) / 2)
            ws.append(area)
    return np.array(xs), np.array(ys), np.array(ws)


def _gauss_grid(y_max: float, nx: int, ny: int):
    """Midpoints in x (periodic integrand) with Gauss-Legendre in y; the arc region is mapped to a box."""
    xm = (np.arange(nx) + 0.5) / nx - 0.5
    g, w = leggauss(ny)
    yt = 1 + (g + 1) / 2 * (y_max - 1)
    wt = w * (y_max - 1) / 2
    X1 = np.repeat(xm, ny)
    Y1 = np.tile(yt, nx)
    W1 = np.tile(wt, nx) / nx
    gx, wx = leggauss(nx)
    xs = gx / 2
    wxs = wx / 2
    lo = np.sqrt(1 - xs * xs)
    X2 = np.repeat(xs, ny)
    Y2 = (lo[:, None] + (g[None, :] + 1) / 2 * (1 - lo[:, None])).ravel()
    W2 = (wxs[:, None] * w[None, :] * (1 - lo[:, None]) / 2).ravel()
    return np.concatenate([X1, X2]), np.concatenate([Y1, Y2]), np.concatenate([W1, W2])


def make_grid(y_max: float, nx: int, ny: int, rule: str = "midpoint") -> DomainGrid:
    if not y_max > 1:
        raise E.BadResolution("y_max must exceed 1")
    if nx < 4 or ny < 4:
        raise E.BadResolution("nx and ny must be at least 4")
    if rule == "midpoint":
        x, y, w = _midpoint_grid(y_max, nx, ny)
    elif rule == "gauss":
        x, y, w = _gauss_grid(y_max, nx, ny)
    else:
        raise E.BadResolution(f"unknown rule {rule!r}")
    return DomainGrid(float(y_max), nx, ny, rule, x, y, w, nx * ny)


class ThetaSampler:
    """Theta kernel values at many tau, with terms grouped by the exact value of q(lambda)."""

    def __init__(self, L: EvenLattice, v0: Isometry, g, p: Poly, R: float):
        if p.n != L.b_plus:
            raise E.BadPolynomialGrading(f"p must be a polynomial in {L.b_plus} variables")
        g = np.eye(L.rank) if g is None else np.asarray(g, dtype=float)
        if not is_orthogonal(L.gram, g):
            raise E.NotOrthogonal("g does not preserve the Gram matrix")
        self.L = L
        self.D = discriminant_group(L)
        iso = v0.compose(np.linalg.inv(g))
        heat = HeatExpansion(p)
        self.deg = 0 if p.is_zero() else p.degree
        self.blocks = {}
        for key in self.D.coset_reps:
            pts = enumerate_coset(L, key, iso, R)
            V = iso(pts.as_float())
            vp = V[:, : L.b_plus]
            maj = (V**2).sum(1)
            qnum = pts.q_numerators(L)
            den = 2 * pts.den * pts.den
            uq, inv = np.unique(qnum, return_inverse=True)
            levels = heat.level_values(vp) if len(maj) else np.zeros((len(heat.levels), 0))
            self.blocks[key] = (maj, inv, np.array([Fraction(int(t), den) for t in uq], dtype=object), levels)
        self.R = R
        self.cell = 0.5 * math.sqrt(float(np.trace(iso.matrix.T @ iso.matrix)))
        self.covol = math.sqrt(abs(L.det))
        self.coef = sum(sum(abs(complex(c)) for c in lv.terms.values()) for lv in heat.levels)

    def grouped(self, y: float) -> dict:
        """For one y: per coset, the exact q values and S_q(y) = sum over q(lambda) = q of heat(p) e^{-pi y maj}."""
        out = {}
        for key, (maj, inv, qs, levels) in self.blocks.items():
            if len(maj) == 0:
                out[key] = (qs, np.zeros(0, dtype=complex))
                continue
            # majorant e^{-2 pi y (Q+ - Q-)} = e^{-pi y maj}; terms past e^{-60} are dropped
            keep = math.pi * y * maj - 0.5 * self.deg * np.log(np.maximum(maj, 1.0)) < 60
            vals = HeatExpansion.combine(levels[:, keep], y) * np.exp(-math.pi * y * maj[keep])
            S = np.bincount(inv[keep], weights=vals.real, minlength=len(qs)) + 1j * np.bincount(inv[keep], weights=vals.imag, minlength=len(qs))
            out[key] = (qs, S)
        return out

    def values(self, x: np.ndarray, y: float) -> dict:
        """Theta per coset at tau = x + iy for an array of x; the x-dependence is e(x q) per group."""
        yf = y ** (self.L.b_minus / 2)
        out = {}
        for key, (qs, S) in self.grouped(y).items():
            if len(S) == 0:
                out[key] = np.zeros(len(x), dtype=complex)
                continue
            qf = np.array([float(q) for q in qs])
            out[key] = yf * (np.exp(2j * math.pi * np.outer(x, qf)) @ S)
        return out

    def tail(self, y: float) -> float:
        from .theta import gaussian_tail

        return y ** (self.L.b_minus / 2) * gaussian_tail(self.L.rank, self.covol, self.cell, self.R, y, self.deg, self.coef)


@dataclass(frozen=True)
class OracleValue:
    value: complex
    error_estimate: float
    grid_delta: float
    cusp_tail: float
    theta_tail: float
    nodes: int


def _integrate(f: CuspFormCoeffs, sampler: ThetaSampler, grid: DomainGrid) -> tuple[complex, float]:
    nu = float(f.weight)
    tot = 0j
    top = 0.0
    ys = np.unique(grid.y)
    # nodes sharing a y value share the grouped theta sums
    order = np.argsort(grid.y, kind="stable")
    ysorted = grid.y[order]
    bounds = np.searchsorted(ysorted, ys, side="left")
    bounds = np.append(bounds, len(ysorted))
    for i, y in enumerate(ys):
        idx = order[bounds[i] : bounds[i + 1]]
        x = grid.x[idx]
        th = sampler.values(x, float(y))
        fv = f.evaluate(x + 1j * y)
        s = np.zeros(len(x), dtype=complex)
        for key in th:
            s += fv[key] * np.conj(th[key])
        s *= y ** (nu - 2)
        tot += np.sum(s * grid.w[idx])
        if y == ys[-1]:
            top = float(np.mean(np.abs(s)))
    return tot, top


def petersson_lift(f: CuspFormCoeffs, L: EvenLattice, v0: Isometry, g, p: Poly, R: float = 8.0, grid: DomainGrid | None = None, refine_check: bool = True) -> OracleValue:
    """Integral of <f(tau), Theta_L(tau, g; p)> y^nu dx dy / y^2 over the truncated fundamental domain."""
    if f.lattice.gram != L.gram:
        raise E.ValidationError("form and lattice disagree")
    grid = make_grid(6.0, 48, 96, "gauss") if grid is None else grid
    if f.is_zero():
        return OracleValue(0j, 0.0, 0.0, 0.0, 0.0, len(grid))
    # the stored expansion must be accurate down to y = sqrt(3)/2
    nmin = min(n for (_, n), c in f.coeffs.items() if c != 0)
    if math.exp(-2 * math.pi * float(f.max_n) * SQ3_2) * max(abs(c) for c in f.coeffs.values()) * float(f.max_n) ** 8 > 1e-3:
        raise E.HorizonExceeded(f"coefficient horizon {f.max_n} too small for evaluation at y = sqrt(3)/2")
    sampler = ThetaSampler(L, v0, g, p, R)
    val, top = _integrate(f, sampler, grid)
    delta = 0.0
    if refine_check:
        coarse, _ = _integrate(f, sampler, grid.coarsen())
        delta = abs(val - coarse)
    cusp = top / (2 * math.pi * float(nmin))
    # |f| at the bottom of the domain times the theta truncation bound there
    fmax = sum(abs(c) * math.exp(-2 * math.pi * float(n) * SQ3_2) for (_, n), c in f.coeffs.items())
    ttail = sampler.tail(SQ3_2) * fmax * SQ3_2 ** (float(f.weight) - 2)
    err = delta + cusp + ttail
    return OracleValue(complex(val), err, delta, cusp, ttail, len(grid))
