"""Random test inputs shared across the suite."""
import math

import numpy as np

from qsimkit import Circuit

ONE_Q = ("U", "R", "RX", "RY", "RZ")
TWO_Q = ("CX", "RXX", "RZZ")
N_PARAMS = {"U": 3, "R": 2, "RX": 1, "RY": 1, "RZ": 1, "CX": 0, "RXX": 1, "RZZ": 1}


def random_circuit(rng: np.random.Generator, n: int, depth: int, measure: bool = False) -> Circuit:
    circ = Circuit(n, n)
    kinds = ONE_Q + (TWO_Q if n > 1 else ())
    for _ in range(depth):
        kind = kinds[rng.integers(len(kinds))]
        qubits = rng.choice(n, size=2 if kind in TWO_Q else 1, replace=False)
        params = rng.uniform(-2 * math.pi, 2 * math.pi, N_PARAMS[kind])
        getattr(circ, kind.lower())(*params, *(int(q) for q in qubits))
    if measure:
        circ.measure_all()
    return circ
