import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ortheta import errors as E
from ortheta.lattice import A1, U, direct_sum, discriminant_group, make_lattice
from ortheta.weil import rho_S, rho_T, rho_word, verify_relations


def e(x):
    return cmath.exp(2j * math.pi * x)


def test_rho_T_examples():
    assert np.allclose(rho_T(discriminant_group(U())).matrix, [[1]])
    assert np.allclose(rho_T(discriminant_group(A1())).matrix, np.diag([1, 1j]))
    assert np.allclose(rho_T(discriminant_group(A1(-1))).matrix, np.diag([1, -1j]))


def test_rho_S_examples():
    assert np.allclose(rho_S(discriminant_group(U()), 0).matrix, [[1]])
    want = e(-1 / 8) / math.sqrt(2) * np.array([[1, 1], [1, -1]])
    assert np.allclose(rho_S(discriminant_group(A1())).matrix, want, atol=1e-15)
    # scalar e(-6/8) = e(-3/4) = i
    assert np.allclose(rho_S(discriminant_group(U()), 6).matrix, [[e(-6 / 8)]])
    assert np.allclose(rho_S(discriminant_group(U()), 6).matrix, [[1j]])


def test_words():
    D = discriminant_group(A1())
    assert np.allclose(rho_word(D, None, "T").matrix, np.diag([1, 1j]))
    assert np.allclose(rho_word(D, None, "Tt").matrix, np.eye(2))
    assert np.allclose(rho_word(D, None, "STSTST").matrix, rho_word(D, None, "SS").matrix, atol=1e-14)
    with pytest.raises(E.BadSymbol):
        rho_word(D, None, "SX")


def test_relations_on_suite(suite):
    for name, L in suite.items():
        rep = verify_relations(discriminant_group(L))
        assert rep["passed"], (name, rep)
        assert max(rep["defects"].values()) < 1e-12


def _milgram_sum(D):
    """Gauss sum |D|^-1/2 sum e(q(g)) = e(sig/8) computed independently of rho_S."""
    return sum(e(float(q)) for q in D.q_values) / math.sqrt(len(D))


@pytest.mark.parametrize("gram", [[[2]], [[-2]], [[0, 2], [2, 0]], [[2, -1], [-1, 2]], [[4]], [[2, 1], [1, 2]], [[6]]])
def test_sig_consistent_with_milgram(gram):
    L = make_lattice(gram)
    D = discriminant_group(L)
    assert abs(_milgram_sum(D) - e(L.sig / 8)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([[[2]], [[-2]], [[0, 2], [2, 0]], [[2, -1], [-1, 2]], [[4]], [[0, 3], [3, 0]]]), st.text(alphabet="STt", min_size=1, max_size=8))
def test_words_are_unitary_and_multiplicative(gram, word):
    D = discriminant_group(make_lattice(gram))
    M = rho_word(D, None, word).matrix
    assert np.max(np.abs(M @ M.conj().T - np.eye(len(D)))) < 1e-12
    # the word map is a homomorphism on concatenation
    a, b = word[: len(word) // 2], word[len(word) // 2 :]
    if a and b:
        assert np.max(np.abs(rho_word(D, None, a).matrix @ rho_word(D, None, b).matrix - M)) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 7])
def test_T_power_phase(n):
    D = discriminant_group(direct_sum(U(2), A1()))
    M = rho_word(D, None, "T" * n).matrix
    want = [e(float(n * q)) for q in D.q_values]
    assert np.max(np.abs(np.diag(M) - want)) < 1e-13
