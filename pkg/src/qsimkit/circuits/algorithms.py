"""Textbook benchmark circuits."""
from __future__ import annotations

import math

import numpy as np

from ..gates import PAULI
from ..qasm import Circuit
from .synthesis import multi_controlled_u

__all__ = ["bernstein_vazirani", "ghz", "grover", "grover_success_probability", "swap_test"]

_HADAMARD = (math.pi / 2, 0.0, math.pi)


def bernstein_vazirani(secret: str) -> Circuit:
    """Measures ``secret`` with certainty; qubit ``k`` carries character ``len-1-k``."""
    if not secret or any(ch not in "01" for ch in secret):
        raise ValueError("secret must be a non-empty bitstring")
    n = len(secret)
    circ = Circuit(n + 1, n)
    anc = n
    circ.x(anc)
    for q in range(n + 1):
        circ.h(q)
    for q in range(n):
        if secret[n - 1 - q] == "1":
            circ.cx(q, anc)
    for q in range(n):
        circ.h(q)
    for q in range(n):
        circ.measure(q, q)
    return circ


def _mcz(circ: Circuit, qubits):
    *controls, target = qubits
    multi_controlled_u(circ, PAULI["Z"], controls, target)


def grover(n: int, marked: int, iterations: int, measure: bool = True) -> Circuit:
    """Uniform superposition, then ``iterations`` rounds of oracle and diffusion."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= marked < 2**n:
        raise ValueError(f"marked index {marked} outside [0, {2**n})")
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    circ = Circuit(n, n)
    qubits = list(range(n))
    for q in qubits:
        circ.h(q)
    zeros = [q for q in qubits if not (marked >> q) & 1]
    for _ in range(iterations):
        for q in zeros:
            circ.x(q)
        _mcz(circ, qubits)
        for q in zeros:
            circ.x(q)
        for q in qubits:
            circ.h(q)
            circ.x(q)
        _mcz(circ, qubits)
        for q in qubits:
            circ.x(q)
            circ.h(q)
    if measure:
        circ.measure_all()
    return circ


def grover_success_probability(n: int, iterations: int) -> float:
    """``sin^2((2k+1) theta)`` with ``sin theta = 2^(-n/2)``."""
    theta = math.asin(2 ** (-n / 2))
    return math.sin((2 * iterations + 1) * theta) ** 2


def ghz(n: int, measure: bool = True) -> Circuit:
    if n < 2:
        raise ValueError("GHZ needs at least two qubits")
    circ = Circuit(n, n)
    circ.h(0)
    for q in range(n - 1):
        circ.cx(q, q + 1)
    if measure:
        circ.measure_all()
    return circ


def _embed(circ: Circuit, part: Circuit, offset: int):
    for instr in part.without_measurements().instructions:
        if instr.kind == "RESET":
            raise ValueError("state preparations may not contain resets")
        circ.append(type(instr)(instr.kind, tuple(q + offset for q in instr.qubits), instr.params))


def swap_test(m: int, prep_a: Circuit | None = None, prep_b: Circuit | None = None) -> Circuit:
    """Ancilla (qubit 0) reads 0 with probability ``(1 + |<a|b>|^2) / 2``.

    Registers occupy qubits ``1..m`` and ``m+1..2m``; ``prep_a``/``prep_b`` are
    ``m``-qubit circuits preparing the compared states.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    circ = Circuit(2 * m + 1, 1)
    for part, off in ((prep_a, 1), (prep_b, m + 1)):
        if part is not None:
            if part.n_qubits != m:
                raise ValueError(f"state preparation must act on {m} qubits")
            _embed(circ, part, off)
    circ.h(0)
    for i in range(m):
        a, b = 1 + i, m + 1 + i
        # Fredkin = CX(b,a) . Toffoli(0, a; b) . CX(b,a)
        circ.cx(b, a)
        multi_controlled_u(circ, PAULI["X"], [0, a], b)
        circ.cx(b, a)
    circ.h(0)
    circ.measure(0, 0)
    return circ
