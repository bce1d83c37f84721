"""Tomography designs, datasets and simulated data.

Labels are strings with one character per qubit; character ``k`` refers to
qubit ``k``.  Measurement settings use ``X``, ``Y``, ``Z``; preparations use
``0``, ``1``, ``+`` and ``i`` (for ``|+i>``).  Outcome keys are bitstrings
with qubit ``n-1`` leftmost, as produced by :func:`qsimkit.core.sample`.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..core import probabilities, sample
from ..gates import u_matrix
from ..qasm import Circuit

__all__ = [
    "PREP_LABELS",
    "SETTING_LABELS",
    "TomoDataset",
    "TomoRecord",
    "measurement_effect",
    "prep_circuit",
    "prep_state",
    "qdt_design",
    "qpt_design",
    "qst_design",
    "setting_rotation",
    "simulate_qdt",
    "simulate_qpt",
    "simulate_qst",
]

SETTING_LABELS = "XYZ"
PREP_LABELS = "01+i"

# U angles rotating each Pauli eigenbasis onto the computational basis
_ROTATION = {"X": (math.pi / 2, 0.0, math.pi), "Y": (math.pi / 2, 0.0, math.pi / 2), "Z": None}
# U angles preparing each state from |0>
_PREP = {"0": None, "1": (math.pi, 0.0, math.pi), "+": (math.pi / 2, 0.0, math.pi), "i": (math.pi / 2, math.pi / 2, 0.0)}


def qst_design(n: int) -> list[str]:
    """All ``3**n`` product Pauli settings."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return ["".join(p) for p in itertools.product(SETTING_LABELS, repeat=n)]


def qpt_design(n: int) -> list[tuple[str, str]]:
    """``4**n`` product preparations times ``3**n`` settings."""
    if n < 1:
        raise ValueError("n must be >= 1")
    preps = ["".join(p) for p in itertools.product(PREP_LABELS, repeat=n)]
    return [(p, s) for p in preps for s in qst_design(n)]


def qdt_design(n: int) -> list[str]:
    """Preparations probing an ``n``-qubit detector."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return ["".join(p) for p in itertools.product(PREP_LABELS, repeat=n)]


def _kron_qubits(mats) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:  # qubit k is bit k: later qubits are more significant
        out = np.kron(m, out)
    return out


def setting_rotation(setting: str) -> np.ndarray:
    """Unitary applied before the computational-basis readout."""
    return _kron_qubits([u_matrix(*_ROTATION[ch]) if _ROTATION[ch] else np.eye(2) for ch in setting])


def measurement_effect(setting: str, outcome: str) -> np.ndarray:
    """Effect of ``outcome`` (qubit ``n-1`` leftmost) under ``setting``."""
    n = len(setting)
    if len(outcome) != n:
        raise ValueError(f"outcome {outcome!r} does not match setting {setting!r}")
    mats = []
    for k, ch in enumerate(setting):
        b = int(outcome[n - 1 - k])
        proj = np.zeros((2, 2), dtype=complex)
        proj[b, b] = 1
        r = u_matrix(*_ROTATION[ch]) if _ROTATION[ch] else np.eye(2)
        mats.append(r.conj().T @ proj @ r)
    return _kron_qubits(mats)


def prep_state(label: str) -> np.ndarray:
    """Density matrix of a product preparation label."""
    mats = []
    for ch in label:
        v = u_matrix(*_PREP[ch])[:, 0] if _PREP[ch] else np.array([1, 0], dtype=complex)
        mats.append(np.outer(v, v.conj()))
    return _kron_qubits(mats)


def prep_circuit(label: str) -> Circuit:
    circ = Circuit(len(label), len(label))
    for q, ch in enumerate(label):
        if _PREP[ch]:
            circ.u(*_PREP[ch], q)
    return circ


def _append_setting(circ: Circuit, setting: str) -> Circuit:
    for q, ch in enumerate(setting):
        if _ROTATION[ch]:
            circ.u(*_ROTATION[ch], q)
    return circ.measure_all()


@dataclass
class TomoRecord:
    prep: str | None
    setting: str
    counts: dict

    def __post_init__(self):
        for k, v in self.counts.items():
            if v < 0 or not np.isfinite(v):
                raise ValueError(f"count for {k!r} must be non-negative, got {v}")


@dataclass
class TomoDataset:
    n_qubits: int
    records: list = field(default_factory=list)

    def add(self, prep, setting, counts):
        if len(setting) != self.n_qubits or any(ch not in SETTING_LABELS for ch in setting):
            raise ValueError(f"bad setting label {setting!r}")
        if prep is not None and (len(prep) != self.n_qubits or any(ch not in PREP_LABELS for ch in prep)):
            raise ValueError(f"bad preparation label {prep!r}")
        self.records.append(TomoRecord(prep, setting, dict(counts)))
        return self

    def to_list(self) -> list:
        return [{"prep": r.prep, "setting": r.setting, "counts": r.counts} for r in self.records]

    def to_json(self) -> str:
        return json.dumps(self.to_list(), indent=2)

    @classmethod
    def from_list(cls, items) -> "TomoDataset":
        if not isinstance(items, list) or not items:
            raise ValueError("dataset must be a non-empty list of records")
        n = len(items[0]["setting"])
        ds = cls(n)
        for it in items:
            ds.add(it.get("prep"), it["setting"], {str(k): v for k, v in it["counts"].items()})
        return ds

    @classmethod
    def from_json(cls, path) -> "TomoDataset":
        with open(path, encoding="utf-8") as fh:
            return cls.from_list(json.load(fh))


def _counts(circ: Circuit, shots: int, seed: int, noise, exact: bool) -> dict:
    if exact:
        n = circ.n_qubits
        probs = probabilities(circ)
        return {format(i, f"0{n}b"): float(p * shots) for i, p in enumerate(probs)}
    return sample(circ, shots, noise=noise, seed=seed).counts


def simulate_qst(prep: Circuit, shots: int, seed: int = 0, noise=None, exact: bool = False) -> TomoDataset:
    """Data for the state produced by ``prep`` under every Pauli setting."""
    n = prep.n_qubits
    ds = TomoDataset(n)
    for i, s in enumerate(qst_design(n)):
        circ = Circuit(n, n, list(prep.without_measurements().instructions))
        ds.add(None, s, _counts(_append_setting(circ, s), shots, seed * 1000003 + i, noise, exact))
    return ds


def simulate_qpt(process: Circuit, shots: int, seed: int = 0, noise=None, exact: bool = False) -> TomoDataset:
    """Data for ``process`` over every (preparation, setting) pair."""
    n = process.n_qubits
    ds = TomoDataset(n)
    body = process.without_measurements().instructions
    for i, (p, s) in enumerate(qpt_design(n)):
        circ = prep_circuit(p)
        for instr in body:
            circ.append(instr)
        ds.add(p, s, _counts(_append_setting(circ, s), shots, seed * 1000003 + i, noise, exact))
    return ds


def simulate_qdt(n: int, shots: int, seed: int = 0, noise=None, exact: bool = False) -> TomoDataset:
    """Computational-basis detector probed with every product preparation.

    Detector imperfections come from ``noise`` (e.g. read-out flips); with
    ``exact=True`` the ideal detector is used.
    """
    ds = TomoDataset(n)
    for i, p in enumerate(qdt_design(n)):
        circ = _append_setting(prep_circuit(p), "Z" * n)
        ds.add(p, "Z" * n, _counts(circ, shots, seed * 1000003 + i, noise, exact))
    return ds
