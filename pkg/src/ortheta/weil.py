"""The Weil representation of Mp_2(Z) on C[D_L]."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import errors as E
from .lattice import DiscriminantForm
from .qmath import expi


@dataclass(frozen=True)
class WeilOperator:
    matrix: np.ndarray
    keys: tuple
    sig: int

    def __matmul__(self, other: "WeilOperator") -> "WeilOperator":
        return WeilOperator(self.matrix @ other.matrix, self.keys, self.sig)

    def apply(self, vec: dict) -> dict:
        v = np.array([vec.get(k, 0) for k in self.keys], dtype=complex)
        w = self.matrix @ v
        return dict(zip(self.keys, w))

    def to_json(self) -> list:
        return [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix]


def rho_T(D: DiscriminantForm, sig: int | None = None, power: int = 1) -> WeilOperator:
    """rho(T)^power: diagonal e(power * q(gamma))."""
    diag = [expi(power * q) for q in D.q_values]
    return WeilOperator(np.diag(np.array(diag, dtype=complex)), D.coset_reps, D.lattice.sig if sig is None else sig)


def rho_S(D: DiscriminantForm, sig: int | None = None) -> WeilOperator:
    """(delta, gamma) entry e(-sig/8)/sqrt|D| * e(-(gamma, delta))."""
    sig = D.lattice.sig if sig is None else sig
    n = len(D)
    c = expi(Fraction(-sig, 8)) / math.sqrt(n)
    M = np.empty((n, n), dtype=complex)
    for i, g in enumerate(D.coset_reps):
        for j, d in enumerate(D.coset_reps):
            M[j, i] = c * expi(-D.b(g, d))
    return WeilOperator(M, D.coset_reps, sig)


def rho_word(D: DiscriminantForm, sig: int | None, word: str) -> WeilOperator:
    """Left-to-right product of generator images; letters S, T and t = T^{-1}."""
    if not word:
        raise E.BadSymbol("empty word")
    gens = {}
    out = None
    for ch in word:
        if ch not in "STt":
            raise E.BadSymbol(f"unknown generator {ch!r}")
        if ch not in gens:
            gens[ch] = rho_S(D, sig) if ch == "S" else rho_T(D, sig, 1 if ch == "T" else -1)
        out = gens[ch] if out is None else out @ gens[ch]
    return out


def unitarity_defect(M: np.ndarray) -> float:
    return float(np.max(np.abs(M @ M.conj().T - np.eye(M.shape[0]))))


def verify_relations(D: DiscriminantForm, sig: int | None = None, tol: float = 1e-12) -> dict:
    S = rho_S(D, sig).matrix
    T = rho_T(D, sig).matrix
    I = np.eye(len(D))
    ST = S @ T
    # Z = S^2 acts as e(-sig/4) e_{-gamma}
    sig_ = D.lattice.sig if sig is None else sig
    Z = np.zeros_like(S)
    for i, g in enumerate(D.coset_reps):
        Z[D.index[D.neg(g)], i] = expi(Fraction(-sig_, 4))
    defects = {
        "unitarity_S": unitarity_defect(S),
        "unitarity_T": unitarity_defect(T),
        "braid_ST3_eq_S2": float(np.max(np.abs(ST @ ST @ ST - S @ S))),
        "S8_eq_identity": float(np.max(np.abs(np.linalg.matrix_power(S, 8) - I))),
        "S2_eq_Z": float(np.max(np.abs(S @ S - Z))),
    }
    return {"defects": defects, "tolerance": tol, "passed": all(v < tol for v in defects.values())}
