"""Exact boson sampling (Clifford-Clifford) and its brute-force probability oracle."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numba
import numpy as np

from .._validation import check_unitary
from ..io import complex_matrix_from_json, complex_matrix_to_json
from .permanent import laplace_minors, permanent

__all__ = [
    "BsNoise",
    "Interferometer",
    "MAX_SAMPLER_PHOTONS",
    "bs_distribution",
    "bs_probability",
    "bs_sample",
    "occupation_string",
]

MAX_SAMPLER_PHOTONS = 20
UNITARITY_TOL = 1e-8  # hand-typed interferometer files carry ~1e-9 rounding


@dataclass(frozen=True, eq=False)
class Interferometer:
    """Unitary ``U`` with ``a_j^dag -> sum_i U[i, j] a_i^dag``."""

    U: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "U", check_unitary(self.U, UNITARITY_TOL, "interferometer"))

    @property
    def n_modes(self) -> int:
        return self.U.shape[0]

    @classmethod
    def from_dict(cls, data: dict) -> "Interferometer":
        if "unitary" not in data:
            raise ValueError("interferometer JSON needs a 'unitary' key")
        return cls(complex_matrix_from_json(data["unitary"]))

    @classmethod
    def from_json(cls, path) -> "Interferometer":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {"unitary": complex_matrix_to_json(self.U)}

    @classmethod
    def fourier(cls, m: int) -> "Interferometer":
        idx = np.arange(m)
        return cls(np.exp(2j * np.pi * np.outer(idx, idx) / m) / math.sqrt(m))

    @classmethod
    def haar(cls, m: int, rng=None) -> "Interferometer":
        from scipy.stats import unitary_group

        return cls(unitary_group.rvs(m, random_state=rng))


def _as_matrix(U) -> np.ndarray:
    return U.U if isinstance(U, Interferometer) else check_unitary(U, UNITARITY_TOL, "interferometer")


def _mode_list(occ) -> list[int]:
    return [i for i, k in enumerate(occ) for _ in range(int(k))]


def occupation_string(occ) -> str:
    return "".join(str(int(k)) for k in occ)


def bs_probability(U, input_occ, output_occ) -> float:
    """``|Per(U[T, S])|^2 / (prod s_i! prod t_j!)`` with rows/cols repeated by occupation."""
    u = _as_matrix(U)
    s, t = list(input_occ), list(output_occ)
    if len(s) != u.shape[0] or len(t) != u.shape[0]:
        raise ValueError("occupation vectors must have one entry per mode")
    if sum(s) != sum(t):
        raise ValueError(f"photon number mismatch: {sum(s)} in, {sum(t)} out")
    sub = u[np.ix_(_mode_list(t), _mode_list(s))]
    norm = math.prod(math.factorial(k) for k in s) * math.prod(math.factorial(k) for k in t)
    return abs(permanent(sub)) ** 2 / norm


def _compositions(n: int, m: int):
    if m == 1:
        yield (n,)
        return
    for k in range(n, -1, -1):
        for rest in _compositions(n - k, m - 1):
            yield (k,) + rest


def bs_distribution(U, input_occ) -> dict:
    """Every output pattern with its exact probability."""
    n = sum(input_occ)
    return {occ: bs_probability(U, input_occ, occ) for occ in _compositions(n, len(input_occ))}


# ---------------------------------------------------------------- sampler

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


@numba.njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _next_uniform(state):
    # state is a length-1 uint64 array (splitmix64 counter)
    state[0] += _GOLDEN
    return float(_mix64(state[0]) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@numba.njit(cache=True)
def _pick(weights, u):
    total = 0.0
    for w in weights:
        total += w
    target = u * total
    acc = 0.0
    for i in range(weights.shape[0]):
        acc += weights[i]
        if target < acc:
            return i
    # rounding at the top end: last index with positive weight
    for i in range(weights.shape[0] - 1, -1, -1):
        if weights[i] > 0:
            return i
    return weights.shape[0] - 1


@numba.njit(cache=True)
def _clifford_clifford(a, state, rows):
    """One sample of output modes for the photons in the columns of ``a`` (``m x n``)."""
    m, n = a.shape
    perm = np.arange(n)
    for i in range(n - 1, 0, -1):  # random column order for this sample
        j = int(_next_uniform(state) * (i + 1))
        if j > i:
            j = i
        perm[i], perm[j] = perm[j], perm[i]
    ap = np.empty((m, n), dtype=np.complex128)
    for c in range(n):
        ap[:, c] = a[:, perm[c]]
    weights = np.empty(m)
    for k in range(1, n + 1):
        sub = np.empty((k - 1, k), dtype=np.complex128)
        for r in range(k - 1):
            for c in range(k):
                sub[r, c] = ap[rows[r], c]
        minors = laplace_minors(sub)
        for i in range(m):
            acc = 0.0 + 0.0j
            for l in range(k):
                acc += ap[i, l] * minors[l]
            weights[i] = acc.real * acc.real + acc.imag * acc.imag
        rows[k - 1] = _pick(weights, _next_uniform(state))


@numba.njit(cache=True)
def _sample_batch(u, in_modes, loss, eta, dark, seed, first, count, out):
    m = u.shape[0]
    n = in_modes.shape[0]
    state = np.zeros(1, dtype=np.uint64)
    rows = np.zeros(max(n, 1), dtype=np.int64)
    probs = np.empty(m)
    for s in range(count):
        # per-sample stream keyed by (seed, sample index)
        state[0] = _mix64(np.uint64(seed) * _GOLDEN + _mix64(np.uint64(first + s)))
        occ = out[s]
        occ[:] = 0
        nind = 0
        ind = np.empty(n, dtype=np.int64)
        for p in range(n):
            if eta >= 1.0 or _next_uniform(state) < eta:
                ind[nind] = in_modes[p]
                nind += 1
            else:
                # distinguishable photon: routed by the single-photon probabilities
                for i in range(m):
                    z = u[i, in_modes[p]]
                    probs[i] = z.real * z.real + z.imag * z.imag
                occ[_pick(probs, _next_uniform(state))] += 1
        if nind > 0:
            a = np.empty((m, nind), dtype=np.complex128)
            for c in range(nind):
                a[:, c] = u[:, ind[c]]
            _clifford_clifford(a, state, rows)
            for k in range(nind):
                occ[rows[k]] += 1
        for i in range(m):
            if loss[i] > 0.0:
                kept = 0
                for _ in range(occ[i]):
                    if _next_uniform(state) >= loss[i]:
                        kept += 1
                occ[i] = kept
            if dark > 0.0 and _next_uniform(state) < dark:
                occ[i] += 1


@dataclass(frozen=True)
class BsNoise:
    """Imperfections for :func:`bs_sample`.

    ``loss`` is the per-mode probability of losing a photon before detection,
    ``eta`` the probability that a photon is indistinguishable from the others,
    ``dark_prob`` the per-detector probability of one extra (dark) count.
    """

    loss: float | tuple = 0.0
    eta: float = 1.0
    dark_prob: float = 0.0

    def loss_vector(self, m: int) -> np.ndarray:
        v = np.broadcast_to(np.asarray(self.loss, dtype=float), (m,)).copy()
        if (v < 0).any() or (v > 1).any():
            raise ValueError("loss probabilities must lie in [0, 1]")
        return v


def bs_sample(U, input_occ, n_samples: int, noise: BsNoise | None = None, seed: int = 0,
              max_photons: int = MAX_SAMPLER_PHOTONS) -> np.ndarray:
    """Output occupation patterns, one row per sample.

    Sample ``i`` depends only on ``(seed, i)``.  Each draw permutes the photon
    columns at random, then places photon ``k`` on a mode with weight
    ``|sum_l A[i, l] Per(A[r, [k] minus l])|^2`` where ``r`` holds the modes
    chosen so far.
    """
    u = _as_matrix(U)
    m = u.shape[0]
    occ = [int(k) for k in input_occ]
    if len(occ) != m or any(k < 0 for k in occ):
        raise ValueError("input occupations must be non-negative, one per mode")
    n = sum(occ)
    if n > max_photons:
        raise ValueError(f"{n} photons exceed the desk-scale guard of {max_photons}")
    if n_samples < 0:
        raise ValueError("n_samples must be >= 0")
    noise = noise or BsNoise()
    if not 0 <= noise.eta <= 1 or not 0 <= noise.dark_prob <= 1:
        raise ValueError("eta and dark_prob must lie in [0, 1]")
    out = np.zeros((n_samples, m), dtype=np.int64)
    if n_samples:
        _sample_batch(np.ascontiguousarray(u), np.array(_mode_list(occ), dtype=np.int64),
                      noise.loss_vector(m), float(noise.eta), float(noise.dark_prob),
                      int(seed) & 0xFFFFFFFFFFFFFFFF, 0, n_samples, out)
    return out
