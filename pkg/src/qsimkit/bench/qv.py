"""Quantum volume with random square circuits."""
from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import unitary_group

from ..circuits.synthesis import append_two_qubit_unitary
from ..core import probabilities, sample
from ..noise import NoiseModel
from ..qasm import Circuit
from .metrics import h_est, heavy_set

__all__ = ["QvRecord", "QvResult", "fully_depolarizing", "qv_circuit", "qv_experiment"]


@dataclass
class QvRecord:
    n: int
    n_c: int
    n_s: int
    n_h: int
    h_est: float
    passed: bool
    heavy_fraction: float


@dataclass
class QvResult:
    records: list = field(default_factory=list)
    sigma_factor: float = 1.0

    @property
    def n_max(self) -> int:
        best = 0
        for rec in sorted(self.records, key=lambda r: r.n):
            if not rec.passed:
                break
            best = rec.n
        return best

    @property
    def quantum_volume(self) -> int:
        return 2**self.n_max

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "n_c", "n_s", "n_h", "h_est", "passed", "heavy_fraction"])
        for r in self.records:
            writer.writerow([r.n, r.n_c, r.n_s, r.n_h, repr(r.h_est), int(r.passed), repr(r.heavy_fraction)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "records": [asdict(r) for r in self.records],
            "quantum_volume": self.quantum_volume,
            "n_max": self.n_max,
            "sigma_factor": self.sigma_factor,
        }


def qv_circuit(n: int, rng: np.random.Generator) -> Circuit:
    """``n`` layers; each pairs qubits by a random permutation and applies Haar SU(4) blocks."""
    circ = Circuit(n, n)
    for _ in range(n):
        perm = rng.permutation(n)
        for i in range(n // 2):
            u = unitary_group.rvs(4, random_state=rng)
            append_two_qubit_unitary(circ, u, int(perm[2 * i]), int(perm[2 * i + 1]), rng)
    return circ


def fully_depolarizing() -> NoiseModel:
    """Every gate output replaced by the maximally mixed state on its qubits."""
    return NoiseModel.depolarizing(p1=3 / 4, p2=15 / 16)


def qv_experiment(n_max: int, n_c: int = 50, n_s: int = 500, noise: NoiseModel | None = None,
                  seed: int = 0, n_min: int = 2, sigma_factor: float = 1.0) -> QvResult:
    """Heavy-output test for every width ``n_min <= n <= n_max``.

    Circuit ``c`` at width ``n`` is generated from the stream ``(seed, n, c)``
    and sampled with seed ``(seed, n, c)`` folded into one integer.
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    result = QvResult(sigma_factor=sigma_factor)
    for n in range(n_min, n_max + 1):
        n_h = 0
        for c in range(n_c):
            ss = np.random.SeedSequence([seed, n, c])
            rng = np.random.default_rng(ss)
            circ = qv_circuit(n, rng)
            heavy = heavy_set(probabilities(circ))
            circ.measure_all()
            shot_seed = int(ss.generate_state(1, np.uint32)[0])
            counts = sample(circ, n_s, noise=noise, seed=shot_seed).counts
            n_h += sum(v for k, v in counts.items() if int(k, 2) in heavy)
        h = h_est(n_h, n_c, n_s, sigma_factor)
        result.records.append(QvRecord(n, n_c, n_s, n_h, h, h > 2 / 3, n_h / (n_c * n_s)))
    return result
