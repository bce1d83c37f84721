"""State-vector engine.

Amplitudes live in a dense ``complex128`` array of length ``2**n``; qubit ``k``
is bit ``k`` of the basis index.  Outcome strings put classical bit ``n-1``
leftmost, so ``"01"`` means clbit 0 read 1.
"""
from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .gates import PAULI, gate_matrix
from .qasm import Circuit, Instruction

__all__ = [
    "CapacityError",
    "ConsistencyError",
    "CountsHistogram",
    "DEFAULT_MAX_QUBITS",
    "StateVector",
    "apply_instruction",
    "apply_matrix",
    "circuit_unitary",
    "expectation_pauli",
    "init_state",
    "measure_qubit",
    "probabilities",
    "reduced_density_matrix",
    "run_shot",
    "sample",
    "shot_rng",
]

DEFAULT_MAX_QUBITS = 26


class CapacityError(MemoryError):
    pass


class ConsistencyError(RuntimeError):
    """Internal numerical invariant broken (e.g. a probability outside [0, 1])."""


@dataclass
class StateVector:
    amplitudes: np.ndarray

    @property
    def n_qubits(self) -> int:
        return int(self.amplitudes.size).bit_length() - 1

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy())

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @classmethod
    def from_array(cls, amps) -> "StateVector":
        amps = np.asarray(amps, dtype=complex).ravel()
        if amps.size & (amps.size - 1) or amps.size == 0:
            raise ValueError("amplitude count must be a power of two")
        return cls(amps)


def init_state(n: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    if n < 1:
        raise ValueError("need at least one qubit")
    if n > max_qubits:
        raise CapacityError(
            f"{n} qubits exceeds the configured cap of {max_qubits} "
            f"({16 * 2**n / 2**30:.0f} GiB of amplitudes)"
        )
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = 1.0
    return StateVector(amps)


# ---------------------------------------------------------------- kernels


def _apply_1q(amps: np.ndarray, n: int, q: int, m: np.ndarray) -> np.ndarray:
    view = amps.reshape(2 ** (n - q - 1), 2, 2**q)
    a0, a1 = view[:, 0, :], view[:, 1, :]
    out = np.empty_like(view)
    out[:, 0, :] = m[0, 0] * a0 + m[0, 1] * a1
    out[:, 1, :] = m[1, 0] * a0 + m[1, 1] * a1
    return out.reshape(-1)


def _apply_kq(amps: np.ndarray, n: int, qubits, m: np.ndarray) -> np.ndarray:
    k = len(qubits)
    axes = [n - 1 - q for q in qubits]
    psi = amps.reshape((2,) * n)
    res = np.tensordot(m.reshape((2,) * (2 * k)), psi, axes=(list(range(k, 2 * k)), axes))
    res = np.moveaxis(res, list(range(k)), axes)
    return np.ascontiguousarray(res).reshape(-1)


def apply_matrix(state: StateVector, matrix: np.ndarray, qubits) -> StateVector:
    """Apply an arbitrary (not necessarily unitary) ``2^k x 2^k`` matrix to ``qubits``."""
    n = state.n_qubits
    qubits = tuple(int(q) for q in qubits)
    if any(not 0 <= q < n for q in qubits) or len(set(qubits)) != len(qubits):
        raise ValueError(f"invalid target qubits {qubits} for a {n}-qubit state")
    matrix = np.asarray(matrix)
    if matrix.shape != (2 ** len(qubits),) * 2:
        raise ValueError(f"matrix of shape {matrix.shape} does not act on {len(qubits)} qubit(s)")
    if len(qubits) == 1:
        return StateVector(_apply_1q(state.amplitudes, n, qubits[0], matrix))
    return StateVector(_apply_kq(state.amplitudes, n, tuple(qubits), matrix))


def apply_instruction(state: StateVector, instr: Instruction) -> StateVector:
    if not instr.is_unitary:
        raise ValueError(f"{instr.kind} is not a unitary instruction")
    return apply_matrix(state, gate_matrix(instr.kind, instr.params), instr.qubits)


def reduced_density_matrix(state: StateVector, qubits) -> np.ndarray:
    """Reduced state of ``qubits`` (first listed = most significant)."""
    n = state.n_qubits
    psi = state.amplitudes.reshape((2,) * n)
    axes = [n - 1 - q for q in qubits]
    psi = np.moveaxis(psi, axes, list(range(len(axes)))).reshape(2 ** len(axes), -1)
    return psi @ psi.conj().T


def _check_probability(p: float) -> float:
    if p < -1e-9 or p > 1 + 1e-9 or not np.isfinite(p):
        raise ConsistencyError(f"branch probability {p!r} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def measure_qubit(state: StateVector, q: int, rng: np.random.Generator) -> tuple[int, StateVector]:
    """Projective Z measurement of qubit ``q`` with Born-rule collapse."""
    n = state.n_qubits
    if not 0 <= q < n:
        raise IndexError(f"qubit {q} out of range for {n}-qubit state")
    view = state.amplitudes.reshape(2 ** (n - q - 1), 2, 2**q)
    p0 = _check_probability(float(np.vdot(view[:, 0, :], view[:, 0, :]).real))
    bit = 0 if rng.random() < p0 else 1
    p = p0 if bit == 0 else 1.0 - p0
    out = np.zeros_like(view)
    out[:, bit, :] = view[:, bit, :] / np.sqrt(p)
    return bit, StateVector(out.reshape(-1))


# ---------------------------------------------------------------- circuits


def shot_rng(seed: int, shot: int) -> np.random.Generator:
    """Independent stream for one shot, derived only from ``(seed, shot)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, shot])))


def _bitstring(clbits) -> str:
    return "".join("1" if b else "0" for b in reversed(clbits))


def _check_capacity(n: int, max_qubits: int):
    if n > max_qubits:
        raise CapacityError(f"{n} qubits exceeds the configured cap of {max_qubits}")


def run_shot(circuit: Circuit, noise=None, rng: np.random.Generator | None = None,
             max_qubits: int = DEFAULT_MAX_QUBITS) -> str:
    """Execute one trajectory and return the classical register as a bitstring.

    ``noise`` is an optional :class:`qsimkit.noise.NoiseModel`.  RESET is a
    measurement followed by a conditional X.
    """
    from .trajectory import run_single

    _check_capacity(circuit.n_qubits, max_qubits)
    return run_single(circuit, noise, np.random.default_rng() if rng is None else rng)


@dataclass
class CountsHistogram:
    counts: dict[str, int]
    shots: int
    seed: int | None = None
    n_clbits: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to the number of shots")
        if any(v < 0 for v in self.counts.values()):
            raise ValueError("negative count")
        widths = {len(k) for k in self.counts}
        if len(widths) > 1:
            raise ValueError("outcome bitstrings have inconsistent lengths")
        if self.n_clbits is None and widths:
            self.n_clbits = widths.pop()

    def frequencies(self) -> dict[str, float]:
        return {k: v / self.shots for k, v in self.counts.items()}

    def to_distribution(self, n_bits: int | None = None) -> np.ndarray:
        n_bits = self.n_clbits if n_bits is None else n_bits
        out = np.zeros(2**n_bits)
        for key, v in self.counts.items():
            out[int(key, 2) if key else 0] += v
        return out / self.shots

    def to_dict(self) -> dict:
        return {"counts": dict(sorted(self.counts.items())), "shots": self.shots, "seed": self.seed}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "CountsHistogram":
        return cls({str(k): int(v) for k, v in data["counts"].items()}, int(data["shots"]), data.get("seed"))

    @classmethod
    def from_json(cls, text: str) -> "CountsHistogram":
        return cls.from_dict(json.loads(text))


def _terminal_measurements(circuit: Circuit) -> bool:
    measured = set()
    for instr in circuit.instructions:
        if instr.kind == "RESET":
            return False
        if instr.kind == "MEASURE":
            measured.add(instr.qubits[0])
        elif instr.kind != "BARRIER" and measured.intersection(instr.qubits):
            return False
    return True


def _is_noiseless(noise) -> bool:
    return noise is None or noise.is_trivial()


def _final_state(circuit: Circuit, max_qubits: int) -> StateVector:
    state = init_state(max(circuit.n_qubits, 1), max_qubits)
    for instr in circuit.instructions:
        if instr.is_unitary:
            state = apply_instruction(state, instr)
    return state


def _sample_terminal(circuit: Circuit, shots: int, seed: int, max_qubits: int) -> Counter:
    probs = _final_state(circuit, max_qubits).probabilities()
    probs = probs / probs.sum()
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed])))
    outcomes, freq = np.unique(rng.choice(probs.size, size=shots, p=probs), return_counts=True)
    meas = [(i.qubits[0], i.clbits[0]) for i in circuit.instructions if i.kind == "MEASURE"]
    counts = Counter()
    for idx, cnt in zip(outcomes.tolist(), freq.tolist()):
        clbits = [0] * circuit.n_clbits
        for q, c in meas:
            clbits[c] = (idx >> q) & 1
        counts[_bitstring(clbits)] += cnt
    return counts


def sample(circuit: Circuit, shots: int, noise=None, seed: int = 0, threads: int = 1,
           max_qubits: int = DEFAULT_MAX_QUBITS) -> CountsHistogram:
    """Run ``shots`` trajectories and aggregate the classical outcomes.

    Shot ``i`` draws from a stream derived from ``(seed, i)`` so the histogram
    does not depend on ``threads``.  Noiseless circuits whose measurements are
    all terminal are sampled directly from the final distribution.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if _is_noiseless(noise) and _terminal_measurements(circuit):
        counts = _sample_terminal(circuit, shots, seed, max_qubits)
        return CountsHistogram(dict(counts), shots, seed, circuit.n_clbits)
    if _is_noiseless(noise):
        noise = None

    from .trajectory import run_trajectories

    _check_capacity(circuit.n_qubits, max_qubits)

    def run_range(lo, hi):
        return run_trajectories(circuit, noise, seed, lo, hi)

    if threads <= 1 or shots < 2 * threads:
        counts = run_range(0, shots)
    else:
        bounds = np.linspace(0, shots, threads + 1).astype(int)
        counts = Counter()
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(run_range, bounds[:-1], bounds[1:]):
                counts.update(part)
    return CountsHistogram(dict(counts), shots, seed, circuit.n_clbits)


def probabilities(circuit: Circuit, max_qubits: int = DEFAULT_MAX_QUBITS) -> np.ndarray:
    """Exact outcome distribution over all qubits (measurements and barriers stripped)."""
    if any(i.kind == "RESET" for i in circuit.instructions):
        raise ValueError("probabilities() requires a reset-free circuit")
    probs = _final_state(circuit, max_qubits).probabilities()
    return probs / probs.sum()


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary of the gate part of ``circuit`` (columns = images of basis states)."""
    n = circuit.n_qubits
    gates = [i for i in circuit.instructions if i.is_unitary]
    cols = np.eye(2**n, dtype=complex)
    out = np.empty_like(cols)
    for j in range(2**n):
        state = StateVector(cols[:, j].copy())
        for instr in gates:
            state = apply_instruction(state, instr)
        out[:, j] = state.amplitudes
    return out


def expectation_pauli(state: StateVector, pauli: str) -> float:
    """``<psi|P|psi>`` for a Pauli string whose character ``k`` acts on qubit ``k``."""
    n = state.n_qubits
    if len(pauli) != n or any(ch not in PAULI for ch in pauli):
        raise ValueError(f"malformed Pauli string {pauli!r} for {n} qubits")
    amps = state.amplitudes
    for q, ch in enumerate(pauli):
        if ch != "I":
            amps = _apply_1q(amps, n, q, PAULI[ch])
    value = np.vdot(state.amplitudes, amps)
    if abs(value.imag) > 1e-10:
        raise ConsistencyError(f"Pauli expectation has imaginary part {value.imag:.3g}")
    return float(value.real)
