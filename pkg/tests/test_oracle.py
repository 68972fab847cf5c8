import math

import numpy as np
import pytest

from ortheta import errors as E
from ortheta.harmonic import QI, Poly
from ortheta.lattice import U, adapted_isometry, build_tower, direct_sum
from ortheta.lift import ParabolicElement
from ortheta.modform import delta_coeffs
from ortheta.oracle import make_grid, petersson_lift

# int_{-1/2}^{1/2} sqrt(1 - x^2) dx
ARC = math.pi / 6 + math.sqrt(3) / 4


@pytest.fixture(scope="module")
def uu_case():
    L = direct_sum(U(), U())
    tw = build_tower(L)
    v0 = adapted_isometry(L, tw)
    g = ParabolicElement((0.21, -0.37), 0.9).matrix(tw.splits[0])
    return L, v0, g, delta_coeffs(30, L)


def test_small_grid_construction():
    G = make_grid(2.0, 4, 4)
    assert G.candidates == 16
    hx, hy = 1 / 4, (2.0 - math.sqrt(3) / 2) / 4
    assert len(G) <= 16
    assert np.any(G.w < hx * hy - 1e-15)


@pytest.mark.parametrize("rule", ["midpoint", "gauss"])
def test_nodes_inside_domain(rule):
    G = make_grid(6.0, 24, 48, rule)
    assert np.all(np.abs(G.x) <= 0.5)
    assert np.all(G.x**2 + G.y**2 >= 1 - 1e-12)
    assert np.all(G.y <= 6.0)


def test_doubling_ny_halves_cell_height():
    a = make_grid(3.0, 4, 8)
    b = make_grid(3.0, 4, 16)
    # compare rows above the arc, where no cell is clipped
    ha = np.diff(np.unique(np.round(a.y[a.y > 1.2], 12)))
    hb = np.diff(np.unique(np.round(b.y[b.y > 1.2], 12)))
    assert np.allclose(ha, ha[0]) and np.allclose(hb, hb[0])
    ha, hb = ha[0], hb[0]
    assert hb == pytest.approx(ha / 2, rel=1e-9)


@pytest.mark.parametrize("rule,tol", [("midpoint", 1e-4), ("gauss", 1e-12)])
def test_area_and_hyperbolic_volume(rule, tol):
    y_max = 5.0
    G = make_grid(y_max, 32, 64, rule)
    assert np.sum(G.w) == pytest.approx(y_max - ARC, abs=tol)
    # the hyperbolic area of the full domain is pi/3; the cusp above y_max has area 1/y_max
    assert np.sum(G.w / G.y**2) == pytest.approx(math.pi / 3 - 1 / y_max, abs=max(tol, 1e-12) * 10)


def test_bad_resolution():
    with pytest.raises(E.BadResolution):
        make_grid(1.0, 8, 8)
    with pytest.raises(E.BadResolution):
        make_grid(3.0, 2, 8)


def test_zero_form(uu_case):
    L, v0, g, f = uu_case
    assert petersson_lift(f.scale(0), L, v0, g, Poly.var(2, 0) ** 12).value == 0


def test_linearity(uu_case):
    L, v0, g, f = uu_case
    p = Poly.var(2, 0) ** 12
    G = make_grid(6.0, 12, 24, "gauss")
    base = petersson_lift(f, L, v0, g, p, 8.0, G, refine_check=False).value
    two = petersson_lift(f.scale(2), L, v0, g, p, 8.0, G, refine_check=False).value
    ip = petersson_lift(f, L, v0, g, p * QI(0, 1), 8.0, G, refine_check=False).value
    assert abs(two - 2 * base) <= 1e-12 * abs(base)
    assert abs(ip - (-1j) * base) <= 1e-12 * abs(base)


def test_refinement_within_reported_delta(uu_case):
    L, v0, g, f = uu_case
    p = Poly.var(2, 0) ** 12
    mid = petersson_lift(f, L, v0, g, p, 8.0, make_grid(6.0, 16, 32, "midpoint"))
    fine = petersson_lift(f, L, v0, g, p, 8.0, make_grid(6.0, 32, 64, "midpoint"), refine_check=False)
    assert abs(fine.value - mid.value) < 3 * mid.grid_delta


def test_horizon_too_small(uu_case):
    L, v0, g, _ = uu_case
    with pytest.raises(E.HorizonExceeded):
        petersson_lift(delta_coeffs(1, L), L, v0, g, Poly.var(2, 0) ** 12)


def test_form_lattice_mismatch(uu_case):
    L, v0, g, _ = uu_case
    with pytest.raises(E.ValidationError):
        petersson_lift(delta_coeffs(30), L, v0, g, Poly.var(2, 0) ** 12)
