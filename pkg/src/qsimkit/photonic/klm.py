"""Post-selected linear-optical CNOT on dual-rail qubits.

Modes: ``c0, c1`` (control rails), ``t0, t1`` (target rails) and two vacuum
ancillas ``vc, vt``.  A CZ is built from three beamsplitters with
``cos^2 theta = 1/3``: one between ``c1`` and ``t1``, where two-photon
interference gives the sign flip, and one on each of ``c0`` and ``t0`` into
an ancilla so every branch has the same amplitude 1/3.  Balanced
beamsplitters on the target rails before and after turn the CZ into a CNOT.
Success means exactly one photon in the control rails and one in the target
rails, which happens with probability 1/9.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock import FockState, apply_beamsplitter, fock_init

C0, C1, T0, T1, VC, VT = range(6)
N_MODES = 6
THIRD = math.acos(1 / math.sqrt(3))

__all__ = ["KlmResult", "decode", "klm_cnot_demo", "klm_cnot_state"]


def klm_cnot_state(control: int, target: int) -> FockState:
    """Output Fock state of the gate for computational input ``|control, target>``."""
    occ = [0] * N_MODES
    occ[C1 if control else C0] = 1
    occ[T1 if target else T0] = 1
    state = fock_init(occ, ceiling=2)
    state = apply_beamsplitter(state, T0, T1, -math.pi / 4, 0.0)
    state = apply_beamsplitter(state, C1, T1, THIRD, 0.0)
    state = apply_beamsplitter(state, C0, VC, THIRD, 0.0)
    state = apply_beamsplitter(state, T0, VT, THIRD, 0.0)
    return apply_beamsplitter(state, T0, T1, math.pi / 4, 0.0)


def decode(occ) -> tuple[int, int] | None:
    """Logical ``(control, target)`` for a coincidence pattern, else None."""
    if occ[C0] + occ[C1] != 1 or occ[T0] + occ[T1] != 1:
        return None
    return int(occ[C1]), int(occ[T1])


@dataclass
class KlmResult:
    shots: int
    successes: int
    truth_table: dict = field(default_factory=dict)  # (c, t) in -> {(c, t) out: count}

    @property
    def success_rate(self) -> float:
        return self.successes / self.shots

    @property
    def sigma(self) -> float:
        return math.sqrt((1 / 9) * (8 / 9) / self.shots)

    def is_cnot(self) -> bool:
        for (c, t), outs in self.truth_table.items():
            if set(outs) != {(c, t ^ c)}:
                return False
        return True


def klm_cnot_demo(shots: int = 10**6, seed: int = 0) -> KlmResult:
    """Sample full photon-number detection of the gate's output.

    Shots are split evenly over the four computational inputs; each outcome
    is drawn from the exact output distribution.
    """
    rng = np.random.default_rng(seed)
    per_input = [shots // 4 + (1 if i < shots % 4 else 0) for i in range(4)]
    successes = 0
    table = {}
    for i, (c, t) in enumerate([(0, 0), (0, 1), (1, 0), (1, 1)]):
        probs = klm_cnot_state(c, t).probabilities()
        keys = list(probs)
        p = np.array([probs[k] for k in keys])
        draws = rng.multinomial(per_input[i], p / p.sum())
        outs: dict = {}
        for k, cnt in zip(keys, draws):
            logical = decode(k)
            if logical is not None and cnt:
                outs[logical] = outs.get(logical, 0) + int(cnt)
                successes += int(cnt)
        table[(c, t)] = outs
    return KlmResult(shots, successes, table)
