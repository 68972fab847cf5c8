"""K- and J-Bessel functions, Gauss 2F1 and Appell F4 with error estimates.

Integer and general real orders of K and J come from scipy.special; the
half-integer orders use the terminating elementary forms, and independent
quadrature/series evaluators are provided for cross-checks.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special as sps

from . import errors as E

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SpecialValue:
    value: float | complex
    error_estimate: float

    def __float__(self):
        return float(self.value)

    def __complex__(self):
        return complex(self.value)


def _half_integer(nu: float) -> int | None:
    t = nu - 0.5
    if t >= 0 and abs(t - round(t)) == 0:
        return int(round(t))
    return None


def kv_half(n: int, x):
    """K_{n+1/2}(x) = sqrt(pi/2x) e^{-x} sum_{j<=n} (n+j)!/(j!(n-j)!) (2x)^{-j}."""
    x = np.asarray(x, dtype=float)
    s = np.zeros_like(x)
    for j in range(n + 1):
        s = s + math.factorial(n + j) / (math.factorial(j) * math.factorial(n - j)) * (2 * x) ** (-j)
    return np.sqrt(np.pi / (2 * x)) * np.exp(-x) * s


def kv(nu: float, x):
    """Vectorized K_nu(x) for x > 0 (half-integer orders in closed form)."""
    nu = abs(float(nu))
    n = _half_integer(nu)
    if n is not None:
        return kv_half(n, x)
    if nu < 1e-100:
        # K is even in nu, so this is exact to O(nu^2); scipy returns nan for subnormal nu
        nu = 0.0
    return sps.kv(nu, x)


def bessel_K(nu: float, x: float) -> SpecialValue:
    if not x > 0:
        raise E.DomainError("K_nu(x) requires x > 0")
    v = float(kv(nu, x))
    if not math.isfinite(v):
        raise E.NumericFailure(f"K_{nu}({x}) is not finite")
    return SpecialValue(v, 8 * _EPS * abs(v) * max(1.0, abs(nu)))


def bessel_K_integral(nu: float, x: float) -> float:
    """K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt by adaptive quadrature."""
    if not x > 0:
        raise E.DomainError("K_nu(x) requires x > 0")
    # the integrand is below 1e-300 relative once x (cosh t - 1) - nu t > 700
    T = math.acosh(1 + (700 + abs(nu) * 50) / x) + 1
    f = lambda t: math.exp(-x * math.cosh(t) + abs(nu) * t) * 0.5 * (1 + math.exp(-2 * abs(nu) * t))
    val, _ = integrate.quad(f, 0, T, epsabs=0, epsrel=1e-13, limit=400)
    return val


def jv(nu: float, x):
    nu = float(nu)
    n = _half_integer(nu)
    x = np.asarray(x, dtype=float)
    if n == 0:
        # sqrt(2/(pi x)) sin x, written to stay finite for subnormal x
        return math.sqrt(2 / math.pi) * np.sqrt(x) * np.sinc(x / np.pi)
    out = sps.jv(nu, x)
    tiny = (x > 0) & (x < 1e-150)
    if np.any(tiny):
        # scipy underflows here; the leading series term is exact to O(x^2)
        xt = np.where(tiny, x, 1.0)
        lead = np.exp(nu * (np.log(xt) - math.log(2)) - math.lgamma(nu + 1))
        out = np.where(tiny, lead, out)
    return out


def bessel_J(nu: float, x: float) -> SpecialValue:
    if x < 0:
        raise E.DomainError("J_nu(x) is evaluated for x >= 0 only")
    v = float(jv(nu, x))
    return SpecialValue(v, 16 * _EPS * max(1.0, abs(v)))


def bessel_J_series(nu: float, x: float, terms: int = 200) -> float:
    """Power series (x/2)^nu sum (-x^2/4)^m / (m! Gamma(m+nu+1)), summed in log space."""
    if x == 0:
        return 1.0 if nu == 0 else 0.0
    tot = 0.0
    lx = math.log(x / 2)
    for m in range(terms):
        lt = (2 * m + nu) * lx - math.lgamma(m + 1) - math.lgamma(m + nu + 1)
        t = math.exp(lt) * (-1) ** m
        tot += t
        if m > x and abs(t) < 1e-18 * max(1.0, abs(tot)):
            break
    return tot


def bessel_J_integral(n: int, x: float) -> float:
    """Bessel's integral (1/pi) int_0^pi cos(n t - x sin t) dt for integer n."""
    with warnings.catch_warnings():
        # quad flags roundoff once it reaches machine precision on this smooth integrand
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(lambda t: math.cos(n * t - x * math.sin(t)), 0, math.pi, epsabs=1e-14, epsrel=1e-13, limit=400)
    return val / math.pi


# ---------------------------------------------------------------------------
# hypergeometric series


def _is_nonpositive_int(c: float) -> bool:
    return c <= 0 and float(c).is_integer()


def _f21_series(a, b, c, z, max_terms=200_000):
    term = 1.0
    tot = 1.0
    n = 0
    err = 0.0
    while n < max_terms:
        if a + n == 0 or b + n == 0:
            return tot, 4 * _EPS * abs(tot)
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        tot += term
        n += 1
        ratio = abs((a + n) * (b + n) / ((c + n) * (n + 1)) * z)
        if n > 5 and ratio < 1 and abs(term) * ratio / (1 - ratio) <= 1e-17 * max(abs(tot), 1e-300):
            err = abs(term) * ratio / (1 - ratio)
            break
    else:
        raise E.NumericFailure("2F1 series did not converge")
    return tot, err + 8 * _EPS * n ** 0.5 * abs(tot)


def gauss_2F1(a: float, b: float, c: float, z: float) -> SpecialValue:
    """2F1(a,b;c;z) for real z < 1; negative z goes through Pfaff's transformation."""
    if _is_nonpositive_int(c):
        raise E.PoleAtC(f"c = {c} is a nonpositive integer")
    if z >= 1:
        raise E.DivergentRegion("2F1 is only evaluated for z < 1")
    if z < -0.5:
        # Pfaff: z/(z-1) lies in (1/3, 1)
        v, e = _f21_series(a, c - b, c, z / (z - 1))
        s = (1 - z) ** (-a)
        return SpecialValue(s * v, s * e)
    v, e = _f21_series(a, b, c, z)
    return SpecialValue(v, e)


def appell_F4(a, b, c, d, x, y, max_order: int = 400) -> SpecialValue:
    """Double series F4(a,b;c,d;x,y) = sum (a)_{m+n}(b)_{m+n}/((c)_m (d)_n m! n!) x^m y^n."""
    if math.sqrt(abs(x)) + math.sqrt(abs(y)) >= 1:
        raise E.OutsideDomain("F4 needs sqrt|x| + sqrt|y| < 1")
    if _is_nonpositive_int(c) or _is_nonpositive_int(d):
        raise E.PoleAtC("c or d is a nonpositive integer")
    # shells of constant m + n = s; each term is one step from the previous shell
    rho = (math.sqrt(abs(x)) + math.sqrt(abs(y))) ** 2
    err = float("inf")
    mag = 1.0
    prev = [1.0]  # T(m, s-1-m) of the previous shell
    tot = 1.0
    for s in range(1, max_order + 1):
        cur = []
        for m in range(s + 1):
            n = s - m
            if n > 0:
                t = prev[m] * (a + s - 1) * (b + s - 1) / ((d + n - 1) * n) * y
            else:
                t = prev[m - 1] * (a + s - 1) * (b + s - 1) / ((c + m - 1) * m) * x
            cur.append(t)
        shell = math.fsum(cur)
        tot += shell
        mag = max(abs(t) for t in cur)
        prev = cur
        if s > 10 and rho < 1:
            # geometric envelope for the remaining shells
            bound = mag * (s + 2) * rho / (1 - rho) * (1 + (abs(a) + abs(b)) / s) ** 2
            if bound < 1e-17 * max(1.0, abs(tot)):
                err = bound + 8 * _EPS * abs(tot) * math.sqrt(s)
                break
    else:
        err = mag * (max_order + 2) * rho / (1 - rho)
    return SpecialValue(tot, err)


def f4_reduction_residual(p: float, q: float, zp_norm: float, zpp_norm: float) -> float:
    """Relative residual of a known F4 -> 2F1 reduction used with the quoted tau function.

    F4((p-1)/2, (p+q-4)/2; (p-1)/2, (q-1)/2; -|z'|^2/4, -|z''|^2/4)
      = tau^{-(p+q-4)/2} 2F1((q-p)/4, (p+q-4)/4; (q-1)/2; |z''|^2/tau^2)
    with tau^2 = (1 + (|z'|^2 - |z''|^2)/4)^2 + |z''|^2.
    """
    a2, b2 = zp_norm**2, zpp_norm**2
    lhs = appell_F4((p - 1) / 2, (p + q - 4) / 2, (p - 1) / 2, (q - 1) / 2, -a2 / 4, -b2 / 4).value
    tau = math.sqrt((1 + (a2 - b2) / 4) ** 2 + b2)
    rhs = tau ** (-(p + q - 4) / 2) * gauss_2F1((q - p) / 4, (p + q - 4) / 4, (q - 1) / 2, b2 / tau**2).value
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)
