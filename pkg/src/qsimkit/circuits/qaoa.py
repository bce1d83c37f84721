"""QAOA circuits over spin QUBOs and fixed-angle training."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..core import StateVector, apply_matrix, probabilities
from ..gates import rx_matrix
from ..qasm import Circuit
from .qubo import QuboProblem

__all__ = [
    "FixedAngleQAOA",
    "FixedAngles",
    "qaoa_circuit",
    "qaoa_energy",
    "qaoa_probabilities",
    "success_probability",
    "train_fixed_angles",
    "uniform_baseline",
]


@dataclass
class FixedAngles:
    betas: tuple
    gammas: tuple

    def __post_init__(self):
        self.betas = tuple(float(b) for b in self.betas)
        self.gammas = tuple(float(g) for g in self.gammas)
        if len(self.betas) != len(self.gammas):
            raise ValueError("betas and gammas must have equal length")

    @property
    def p(self) -> int:
        return len(self.betas)

    def to_vector(self) -> np.ndarray:
        return np.array(self.betas + self.gammas)

    @classmethod
    def from_vector(cls, v) -> "FixedAngles":
        v = np.asarray(v, dtype=float)
        p = v.size // 2
        return cls(tuple(v[:p]), tuple(v[p:]))

    def to_dict(self) -> dict:
        return {"p": self.p, "betas": list(self.betas), "gammas": list(self.gammas)}

    @classmethod
    def from_dict(cls, data: dict) -> "FixedAngles":
        return cls(tuple(data["betas"]), tuple(data["gammas"]))


def qaoa_circuit(q: QuboProblem, angles: FixedAngles, measure: bool = False) -> Circuit:
    """``|+>^n``, then per layer ``RZZ(gamma s_ij)``, ``RZ(2 gamma s_ii)``, ``RX(2 beta)``."""
    if angles.p < 1:
        raise ValueError("need at least one layer")
    n = q.n_vars
    circ = Circuit(n, n)
    for i in range(n):
        circ.h(i)
    lin = q.linear()
    for beta, gamma in zip(angles.betas, angles.gammas):
        for i, j, s in q.pairs():
            circ.rzz(gamma * s, i, j)
        for i in range(n):
            if lin[i] != 0:
                circ.rz(2 * gamma * lin[i], i)
        for i in range(n):
            circ.rx(2 * beta, i)
    if measure:
        circ.measure_all()
    return circ


def _spins(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    return 1 - 2 * ((idx[:, None] >> np.arange(n)) & 1)


def _cost_diagonal(q: QuboProblem) -> np.ndarray:
    return q.energy(_spins(q.n_vars)) - q.offset


def qaoa_probabilities(q: QuboProblem, angles: FixedAngles, diag: np.ndarray | None = None) -> np.ndarray:
    """Output distribution using a diagonal phase plus mixer rotations (no circuit)."""
    n = q.n_vars
    diag = _cost_diagonal(q) if diag is None else diag
    state = StateVector(np.full(2**n, 2 ** (-n / 2), dtype=complex))
    for beta, gamma in zip(angles.betas, angles.gammas):
        state = StateVector(state.amplitudes * np.exp(-1j * gamma * diag))
        mixer = rx_matrix(2 * beta)
        for i in range(n):
            state = apply_matrix(state, mixer, (i,))
    return state.probabilities()


def qaoa_energy(q: QuboProblem, angles: FixedAngles) -> float:
    """``<H_targ>`` (offset excluded) from the circuit's exact output distribution."""
    probs = probabilities(qaoa_circuit(q, angles))
    return float(probs @ _cost_diagonal(q))


def _optimal_mask(q: QuboProblem) -> np.ndarray:
    e = _cost_diagonal(q)
    return np.isclose(e, e.min(), rtol=0, atol=1e-9 * max(1.0, abs(e.min())))


def success_probability(q: QuboProblem, angles: FixedAngles) -> float:
    """Probability mass on the optimal assignments."""
    return float(qaoa_probabilities(q, angles)[_optimal_mask(q)].sum())


def uniform_baseline(q: QuboProblem) -> float:
    """Success probability of uniform random guessing."""
    return float(_optimal_mask(q).mean())


_BOX = (math.pi, 2 * math.pi)  # (beta, gamma) periods of the search box


def _wrap(v: np.ndarray, p: int) -> np.ndarray:
    out = v.copy()
    out[:p] %= _BOX[0]
    out[p:] %= _BOX[1]
    return out


def _pattern_search(f, x0, step0, min_step, max_iter):
    x, fx = x0.copy(), f(x0)
    step = step0.copy()
    evals = 1
    for _ in range(max_iter):
        improved = False
        for i in range(x.size):
            for sgn in (1.0, -1.0):
                y = x.copy()
                y[i] += sgn * step[i]
                fy = f(y)
                evals += 1
                if fy > fx + 1e-15:
                    x, fx, improved = y, fy, True
                    break
        if not improved:
            step *= 0.5
            if step.max() < min_step:
                break
    return x, fx, evals


def train_fixed_angles(instances, p: int = 1, restarts: int = 8, max_iter: int = 400,
                       min_step: float = 1e-4, seed: int = 0) -> tuple[FixedAngles, float]:
    """Maximise ``min_i P_success(instance_i)`` by multi-start pattern search.

    Starts: all-zero angles plus ``restarts`` uniform draws from the box
    ``[0, pi) x [0, 2 pi)`` per layer.  Returns the best angles and their
    minimum success probability.
    """
    instances = list(instances)
    if not instances:
        raise ValueError("need at least one training instance")
    if p < 1:
        raise ValueError("p must be >= 1")
    for q in instances:
        if q.n_vars > 12:
            raise ValueError("training instances are limited to 12 variables")
    diags = [_cost_diagonal(q) for q in instances]
    masks = [_optimal_mask(q) for q in instances]

    def objective(v):
        ang = FixedAngles.from_vector(_wrap(v, p))
        return min(float(qaoa_probabilities(q, ang, d)[m].sum()) for q, d, m in zip(instances, diags, masks))

    rng = np.random.default_rng(seed)
    box = np.array([_BOX[0]] * p + [_BOX[1]] * p)
    starts = [np.zeros(2 * p)] + [rng.random(2 * p) * box for _ in range(restarts)]
    best_x, best_f = None, -np.inf
    for x0 in starts:
        x, fx, _ = _pattern_search(objective, x0, box / 8, min_step, max_iter)
        if fx > best_f:
            best_x, best_f = x, fx
    return FixedAngles.from_vector(_wrap(best_x, p)), best_f


class FixedAngleQAOA(BaseEstimator):
    """Train angles on a set of instances, then score transfer to new ones."""

    def __init__(self, p: int = 1, restarts: int = 8, max_iter: int = 400, seed: int = 0):
        self.p = p
        self.restarts = restarts
        self.max_iter = max_iter
        self.seed = seed

    def fit(self, X, y=None):
        self.angles_, self.train_min_probability_ = train_fixed_angles(
            X, self.p, self.restarts, self.max_iter, seed=self.seed)
        return self

    def predict_proba(self, X) -> np.ndarray:
        """Success probability on each instance."""
        check_is_fitted(self, "angles_")
        return np.array([success_probability(q, self.angles_) for q in X])

    def predict(self, X) -> list:
        """Most likely assignment (spins) for each instance."""
        check_is_fitted(self, "angles_")
        out = []
        for q in X:
            probs = qaoa_probabilities(q, self.angles_)
            out.append(_spins(q.n_vars)[int(np.argmax(probs))])
        return out

    def score(self, X, y=None) -> float:
        """Minimum success probability over ``X``."""
        return float(self.predict_proba(X).min())

    def to_json(self) -> str:
        check_is_fitted(self, "angles_")
        return json.dumps({**self.angles_.to_dict(), "min_probability": self.train_min_probability_}, indent=2)
