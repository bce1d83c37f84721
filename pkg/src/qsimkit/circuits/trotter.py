"""Pauli Hamiltonians and product-formula evolution circuits."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from ..gates import pauli_matrix
from ..qasm import Circuit

__all__ = [
    "PauliHamiltonian",
    "append_pauli_exponential",
    "group_commuting",
    "qubitwise_commute",
    "suzuki_coefficient",
    "trotter_circuit",
    "trotter_error",
]


@dataclass
class PauliHamiltonian:
    """``H = sum_i h_i P_i``; character ``k`` of each string acts on qubit ``k``."""

    terms: list

    def __post_init__(self):
        terms = [(float(c), str(p).upper()) for c, p in self.terms]
        if not terms:
            raise ValueError("Hamiltonian needs at least one term")
        n = len(terms[0][1])
        for c, p in terms:
            if len(p) != n or n == 0 or any(ch not in "IXYZ" for ch in p):
                raise ValueError(f"bad Pauli string {p!r}")
            if not math.isfinite(c):
                raise ValueError("coefficients must be finite")
        self.terms = terms

    @property
    def n_qubits(self) -> int:
        return len(self.terms[0][1])

    def matrix(self) -> np.ndarray:
        return sum(c * pauli_matrix(p) for c, p in self.terms)

    def identity_weight(self) -> float:
        return sum(c for c, p in self.terms if set(p) == {"I"})

    def to_dict(self) -> dict:
        return {"terms": [[c, p] for c, p in self.terms]}

    @classmethod
    def from_dict(cls, data: dict) -> "PauliHamiltonian":
        return cls([(c, p) for c, p in data["terms"]])

    @classmethod
    def from_json(cls, path) -> "PauliHamiltonian":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def qubitwise_commute(a: str, b: str) -> bool:
    return all(x == y or x == "I" or y == "I" for x, y in zip(a, b))


def group_commuting(h: PauliHamiltonian) -> list[list]:
    """Greedy colouring in term order: each term joins the first family it commutes with."""
    families: list[list] = []
    for term in h.terms:
        for fam in families:
            if all(qubitwise_commute(term[1], other[1]) for other in fam):
                fam.append(term)
                break
        else:
            families.append([term])
    return families


def append_pauli_exponential(circ: Circuit, theta: float, pauli: str) -> Circuit:
    """``exp(-i theta P)``: basis change, CX parity ladder, ``RZ(2 theta)``, undo."""
    support = [q for q, ch in enumerate(pauli) if ch != "I"]
    if not support:
        return circ  # global phase
    for q in support:
        if pauli[q] == "X":
            circ.h(q)
        elif pauli[q] == "Y":
            circ.rx(math.pi / 2, q)
    for a, b in zip(support, support[1:]):
        circ.cx(a, b)
    circ.rz(2 * theta, support[-1])
    for a, b in reversed(list(zip(support, support[1:]))):
        circ.cx(a, b)
    for q in support:
        if pauli[q] == "X":
            circ.h(q)
        elif pauli[q] == "Y":
            circ.rx(-math.pi / 2, q)
    return circ


def suzuki_coefficient(k: int) -> float:
    """``s_k = 1 / (4 - 4^(1/(2k-1)))`` for the order-``2k`` recursion."""
    if k < 2:
        raise ValueError("k must be >= 2")
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * k - 1)))


def _sequence(terms, dt: float, order: int) -> list:
    """(angle, pauli) list for one step of the given order."""
    if order == 1:
        return [(c * dt, p) for c, p in terms]
    if order == 2:
        half = [(c * dt / 2, p) for c, p in terms]
        return half + half[::-1]
    k = order // 2
    s = suzuki_coefficient(k)
    outer = _sequence(terms, s * dt, order - 2)
    middle = _sequence(terms, (1 - 4 * s) * dt, order - 2)
    return outer + outer + middle + outer + outer


def trotter_circuit(h: PauliHamiltonian, t: float, r: int, order: int = 1) -> Circuit:
    """Product-formula approximation of ``exp(-i t H)`` with ``r`` steps."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if order < 1 or (order > 1 and order % 2):
        raise ValueError("order must be 1 or even")
    terms = [term for fam in group_commuting(h) for term in fam]
    step = _sequence(terms, t / r, order)
    circ = Circuit(h.n_qubits, h.n_qubits)
    for _ in range(r):
        for theta, p in step:
            append_pauli_exponential(circ, theta, p)
    return circ


def trotter_error(h: PauliHamiltonian, t: float, r: int, order: int = 1) -> float:
    """Spectral-norm distance to ``exp(-i t H)``; identity terms restored as a phase."""
    from ..core import circuit_unitary

    u = circuit_unitary(trotter_circuit(h, t, r, order)) * np.exp(-1j * t * h.identity_weight())
    return float(np.linalg.norm(u - expm(-1j * t * h.matrix()), 2))
