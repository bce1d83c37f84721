"""Single-qubit randomized benchmarking."""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ..core import sample
from ..gates import H, u_params
from ..noise import GateNoise, NoiseModel, depolarizing1
from ..qasm import Circuit

__all__ = ["RBFitter", "RbResult", "clifford_group", "depolarizing_for_gamma", "rb_experiment", "rb_sequence"]

_S = np.diag([1, 1j])


def _canonical(m: np.ndarray) -> tuple:
    """Hashable key of ``m`` modulo global phase."""
    flat = m.ravel()
    k = int(np.argmax(np.abs(flat) > 1e-9))
    m = m * (abs(flat[k]) / flat[k])
    return tuple(np.round(m.ravel(), 8).tolist())


@lru_cache(maxsize=1)
def clifford_group() -> tuple:
    """The 24 single-qubit Cliffords (mod phase), generated from H and S."""
    elems = {_canonical(np.eye(2)): np.eye(2, dtype=complex)}
    frontier = [np.eye(2, dtype=complex)]
    while frontier:
        nxt = []
        for m in frontier:
            for g in (H, _S):
                p = g @ m
                key = _canonical(p)
                if key not in elems:
                    elems[key] = p
                    nxt.append(p)
        frontier = nxt
    group = tuple(elems.values())
    if len(group) != 24:
        raise AssertionError(f"expected 24 Cliffords, got {len(group)}")
    return group


@lru_cache(maxsize=1)
def _tables():
    group = clifford_group()
    index = {_canonical(m): i for i, m in enumerate(group)}
    mult = np.empty((24, 24), dtype=np.int64)
    for i, a in enumerate(group):
        for j, b in enumerate(group):
            mult[i, j] = index[_canonical(a @ b)]
    inverse = np.array([index[_canonical(m.conj().T)] for m in group])
    angles = [u_params(m) for m in group]
    return mult, inverse, angles


def rb_sequence(length: int, rng: np.random.Generator) -> Circuit:
    """``length`` random Cliffords followed by their exact inverse, each one U gate."""
    mult, inverse, angles = _tables()
    circ = Circuit(1, 1)
    total = _identity_index()
    for g in rng.integers(0, 24, size=length):
        circ.u(*angles[g], 0)
        total = mult[g, total]
    circ.u(*angles[inverse[total]], 0)
    circ.measure(0, 0)
    return circ


@lru_cache(maxsize=1)
def _identity_index() -> int:
    key = _canonical(np.eye(2))
    return [_canonical(m) for m in clifford_group()].index(key)


def depolarizing_for_gamma(gamma: float) -> NoiseModel:
    """Noise model whose per-gate channel has depolarizing parameter ``gamma``.

    ``depolarizing1(p)`` maps ``rho -> (1 - 4p/3) rho + (4p/3) I/2``, so
    ``p = 3 (1 - gamma) / 4``.
    """
    return NoiseModel(gates={"U": GateNoise(channels=(depolarizing1(0.75 * (1 - gamma)),))})


def _decay(L, a, b, gamma):
    return a * np.power(gamma, L) + b


class RBFitter(RegressorMixin, BaseEstimator):
    """Fit ``p(L) = A gamma^L + B`` to survival probabilities.

    The starting point comes from a straight-line fit of ``log(p - B0)``
    against ``L`` with ``B0 = b_init``.
    """

    def __init__(self, b_init: float = 0.5, d: int = 2):
        self.b_init = b_init
        self.d = d

    def fit(self, X, y):
        L = np.asarray(X, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        if L.size != y.size or L.size < 2:
            raise ValueError("need at least two (length, survival) pairs")
        if not np.all(np.isfinite(y)):
            raise ValueError("survival data must be finite")
        shifted = np.clip(y - self.b_init, 1e-9, None)
        slope, icpt = np.polyfit(L, np.log(shifted), 1)
        p0 = [math.exp(icpt), self.b_init, float(np.clip(math.exp(slope), 1e-6, 1.0))]
        try:
            with warnings.catch_warnings():
                # flat (noiseless) data leaves A and B degenerate; covariance is then inf
                warnings.simplefilter("ignore", OptimizeWarning)
                popt, pcov = curve_fit(_decay, L, y, p0=p0, bounds=([-np.inf, -np.inf, 0.0], [np.inf, np.inf, 1.0]),
                                       maxfev=20000)
        except (RuntimeError, ValueError) as exc:
            raise RuntimeError(f"RB fit failed: {exc}") from exc
        if not np.all(np.isfinite(popt)):
            raise RuntimeError("RB fit returned non-finite parameters")
        self.A_, self.B_, self.gamma_ = (float(v) for v in popt)
        self.covariance_ = pcov
        self.n_features_in_ = 1
        return self

    @property
    def fidelity_(self) -> float:
        check_is_fitted(self, "gamma_")
        return 1 / self.d + (1 - 1 / self.d) * self.gamma_

    def predict(self, X):
        check_is_fitted(self, "gamma_")
        return _decay(np.asarray(X, dtype=float).ravel(), self.A_, self.B_, self.gamma_)


@dataclass
class RbResult:
    lengths: list
    survival: list
    per_sequence: list = field(default_factory=list)
    fit: tuple | None = None  # (A, B, gamma)
    avg_gate_fidelity: float | None = None
    error: str | None = None

    @property
    def gamma(self) -> float | None:
        return None if self.fit is None else self.fit[2]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["L", "survival"])
        for L, s in zip(self.lengths, self.survival):
            w.writerow([L, repr(float(s))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        out = {"lengths": list(self.lengths), "survival": [float(s) for s in self.survival],
               "avg_gate_fidelity": self.avg_gate_fidelity, "error": self.error}
        if self.fit is not None:
            out.update(A=self.fit[0], B=self.fit[1], gamma=self.fit[2])
        return out


def rb_experiment(lengths, n_seq: int = 30, shots: int = 1000, noise: NoiseModel | None = None,
                  seed: int = 0) -> RbResult:
    """Survival of ``n_seq`` random sequences per length and the exponential fit."""
    lengths = [int(L) for L in lengths]
    if len(lengths) < 2 or min(lengths) < 1:
        raise ValueError("need at least two positive sequence lengths")
    per_seq = []
    for i, L in enumerate(lengths):
        row = []
        for s in range(n_seq):
            ss = np.random.SeedSequence([seed, i, s])
            circ = rb_sequence(L, np.random.default_rng(ss))
            counts = sample(circ, shots, noise=noise, seed=int(ss.generate_state(1, np.uint32)[0])).counts
            row.append(counts.get("0", 0) / shots)
        per_seq.append(row)
    survival = [float(np.mean(r)) for r in per_seq]
    result = RbResult(lengths, survival, per_seq)
    try:
        fitter = RBFitter().fit(lengths, survival)
    except RuntimeError as exc:
        result.error = str(exc)
        return result
    result.fit = (fitter.A_, fitter.B_, fitter.gamma_)
    result.avg_gate_fidelity = fitter.fidelity_
    return result
