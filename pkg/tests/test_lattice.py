import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ortheta import errors as E
from ortheta.lattice import (
    A1,
    U,
    adapted_isometry,
    box_enumerate,
    build_tower,
    check_discriminant_form,
    direct_sum,
    discriminant_group,
    enumerate_coset,
    enumerate_hyperboloid,
    find_isotropic,
    make_lattice,
    project_pi,
    split_at,
    standard_isometry,
)


def test_make_lattice_signatures():
    assert (A1().b_plus, A1().b_minus) == (1, 0)
    assert (U().b_plus, U().b_minus) == (1, 1)
    with pytest.raises(E.OddDiagonal):
        make_lattice([[2, 1], [1, 1]])
    with pytest.raises(E.NotSymmetric):
        make_lattice([[2, 1], [0, 2]])
    with pytest.raises(E.Degenerate):
        make_lattice([[2, 2], [2, 2]])


def test_discriminant_examples():
    D = discriminant_group(U())
    assert len(D) == 1 and D.q_values == (0,)
    D = discriminant_group(A1())
    assert D.coset_reps == ((F(0),), (F(1, 2),))
    assert D.q((F(1, 2),)) == F(1, 4)
    D = discriminant_group(U(2))
    assert len(D) == 4
    assert D.q((F(1, 2), F(0))) == 0
    assert D.q((F(1, 2), F(1, 2))) == F(1, 2)


def _brute_discriminant(gram):
    """Dual lattice classes by scanning G^-1 Z^n mod Z^n (independent of the Smith form path)."""
    G = np.array(gram, dtype=float)
    Gi = np.linalg.inv(G)
    d = abs(round(np.linalg.det(G)))
    keys = set()
    for y in itertools.product(range(d), repeat=len(gram)):
        v = Gi @ np.array(y, dtype=float)
        keys.add(tuple(F(round(x * d), d) % 1 for x in v))
    return keys


@pytest.mark.parametrize("gram", [[[2]], [[0, 2], [2, 0]], [[2, -1], [-1, 2]], [[2, 1, 0], [1, 4, 0], [0, 0, -2]], [[0, 3], [3, 0]]])
def test_discriminant_group_matches_brute_force(gram):
    D = discriminant_group(make_lattice(gram))
    assert set(D.coset_reps) == _brute_discriminant(gram)
    assert check_discriminant_form(D) == 0


even_grams = st.integers(1, 3).flatmap(
    lambda n: st.lists(st.integers(-3, 3), min_size=n * n, max_size=n * n).map(lambda xs, n=n: [[(2 * xs[i * n + i]) if i == j else xs[min(i, j) * n + max(i, j)] for j in range(n)] for i in range(n)])
)


@settings(max_examples=40, deadline=None)
@given(even_grams)
def test_discriminant_bilinear_compatibility(gram):
    try:
        L = make_lattice(gram)
    except E.Degenerate:
        return
    if abs(L.det) > 60:
        return
    assert check_discriminant_form(discriminant_group(L)) == 0


def test_find_isotropic_examples():
    assert find_isotropic(U(), 1) == (1, 0)
    with pytest.raises(E.NoneFound):
        find_isotropic(A1(), 10)
    assert find_isotropic(direct_sum(U(), A1()), 2) == (1, 0, 0)


def test_split_examples():
    sp = split_at(U(), (1, 0))
    assert sp.N == 1 and sp.zeta == (0, 1) and sp.z_prime == (0, 1) and sp.L1 is None
    sp = split_at(direct_sum(U(), U()), (1, 0, 0, 0))
    assert sp.N == 1 and sp.L1.rank == 2 and sp.L1.det == -1
    sp = split_at(U(2), (1, 0))
    assert sp.N == 2 and sp.zeta == (0, 1) and sp.z_prime == (0, F(1, 2))
    with pytest.raises(E.NotIsotropic):
        split_at(A1(), (1,))
    with pytest.raises(E.NotPrimitive):
        split_at(U(), (2, 0))


def test_project_pi_examples():
    L = direct_sum(U(), A1())
    sp = split_at(L, (1, 0, 0))
    assert project_pi(split_at(U(), (1, 0)), (0, 0)) == ()
    assert project_pi(sp, (0, 0, F(1, 2))) == (F(1, 2),)
    assert project_pi(sp, (0, 1, 0)) == (0,)


@pytest.mark.parametrize("L,z", [(direct_sum(U(2), A1()), (1, 0, 0)), (direct_sum(U(), U(3)), (0, 0, 1, 0)), (direct_sum(U(2), U(), A1()), (0, 1, 0, 0, 0))])
def test_split_determinant_relation(L, z):
    sp = split_at(L, z)
    assert len(discriminant_group(L)) == sp.N**2 * len(discriminant_group(sp.L1))
    # pi sends L onto L1: images of the basis have integral coordinates and generate
    imgs = np.array([[float(x) for x in project_pi(sp, row)] for row in np.eye(L.rank, dtype=int).tolist()])
    assert np.allclose(imgs, np.round(imgs))
    r = sp.L1.rank
    dets = {abs(round(np.linalg.det(imgs[list(c)]))) for c in itertools.combinations(range(L.rank), r)}
    assert math.gcd(*dets) == 1


def test_standard_isometry_examples():
    v = standard_isometry(A1())
    assert np.allclose(np.abs(v.matrix), [[math.sqrt(2)]])
    v = standard_isometry(make_lattice([[2, 0], [0, -2]]))
    assert np.allclose(np.abs(v.matrix), np.diag([math.sqrt(2)] * 2))
    v = standard_isometry(U())
    assert np.allclose(np.abs(v.matrix), np.full((2, 2), 1 / math.sqrt(2)))
    for L in (U(), A1(), direct_sum(U(), U(2), A1())):
        assert standard_isometry(L).defect(L.gram) < 1e-12


def test_adapted_isometry_alignment():
    L = direct_sum(U(), A1())
    tw = build_tower(L)
    v = adapted_isometry(L, tw)
    assert v.defect(L.gram) < 1e-12
    z = np.array([float(x) for x in tw.splits[0].z])
    vz = v(z)
    assert abs(vz[1]) < 1e-12  # z lies in <e1, e3>
    L1v = v(np.array([0.0, 0.0, 1.0]))
    assert abs(L1v[0]) < 1e-12 and abs(L1v[2]) < 1e-12
    LL = direct_sum(U(), U())
    tw = build_tower(LL)
    assert tw.s == 2
    assert adapted_isometry(LL, tw).defect(LL.gram) < 1e-12


def test_enumerate_examples():
    L = A1()
    v0 = standard_isometry(L)
    pts = enumerate_coset(L, (0,), v0, 3).to_list()
    assert sorted(p[0] for p in pts) == [-2, -1, 0, 1, 2]
    # 2 x^2 <= 4 on 1/2 + Z keeps only x = +-1/2 (x = 3/2 gives 4.5)
    pts = enumerate_coset(L, (F(1, 2),), v0, 2).to_list()
    want = [x for x in (F(n, 2) for n in range(-9, 10, 2)) if 2 * x * x <= 4]
    assert sorted(p[0] for p in pts) == want == [F(-1, 2), F(1, 2)]
    assert len(enumerate_coset(L, (0,), v0, 0)) == 1
    assert len(enumerate_coset(L, (F(1, 2),), v0, 0)) == 0


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 4.0), st.floats(0.0, 2.0), st.sampled_from(["U", "U+A1", "A1+A1(-1)"]))
def test_enumeration_monotone_and_matches_box(R1, dR, name):
    L = {"U": U(), "U+A1": direct_sum(U(), A1()), "A1+A1(-1)": direct_sum(A1(), A1(-1))}[name]
    v0 = standard_isometry(L)
    for g in discriminant_group(L).coset_reps:
        a = set(enumerate_coset(L, g, v0, R1).to_list())
        b = set(enumerate_coset(L, g, v0, R1 + dR).to_list())
        assert a <= b
        h = int(math.ceil((R1 + dR) * np.linalg.norm(np.linalg.inv(v0.matrix), 2))) + 1
        assert set(box_enumerate(L, g, v0, R1 + dR, h).to_list()) == b


def test_enumerate_hyperboloid_examples():
    L = A1()
    v0 = standard_isometry(L)
    assert sorted(p[0] for p in enumerate_hyperboloid(L, (0,), 1, v0, 2).to_list()) == [-1, 1]
    assert sorted(p[0] for p in enumerate_hyperboloid(L, (F(1, 2),), F(1, 4), v0, 1).to_list()) == [F(-1, 2), F(1, 2)]
    pts = enumerate_hyperboloid(U(), (0, 0), 1, standard_isometry(U()), 10).to_list()
    assert sorted(pts) == [(-1, -1), (1, 1)]
