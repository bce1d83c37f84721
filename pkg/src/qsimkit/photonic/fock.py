"""Sparse Fock-space states of a few optical modes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FockState",
    "apply_beamsplitter",
    "apply_loss",
    "apply_phase",
    "beamsplitter_unitary",
    "detect",
    "fock_init",
]


@dataclass
class FockState:
    """Occupation tuple -> amplitude; every tuple has ``n_modes`` entries."""

    n_modes: int
    amplitudes: dict = field(default_factory=dict)
    ceiling: int = 8

    def norm(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def probabilities(self) -> dict:
        return {k: abs(a) ** 2 for k, a in self.amplitudes.items() if abs(a) > 0}

    def photon_numbers(self) -> set:
        return {sum(k) for k in self.amplitudes}

    def amplitude(self, occ) -> complex:
        return self.amplitudes.get(tuple(occ), 0.0)

    def copy(self) -> "FockState":
        return FockState(self.n_modes, dict(self.amplitudes), self.ceiling)

    def _check_mode(self, mode: int):
        if not 0 <= mode < self.n_modes:
            raise IndexError(f"mode {mode} out of range for {self.n_modes} modes")

    def _pruned(self, amps: dict, tol: float = 1e-15) -> "FockState":
        return FockState(self.n_modes, {k: a for k, a in amps.items() if abs(a) > tol}, self.ceiling)


def fock_init(occupations, ceiling: int | None = None) -> FockState:
    occ = tuple(int(x) for x in occupations)
    if any(x < 0 for x in occ):
        raise ValueError("occupations must be non-negative")
    total = sum(occ)
    ceiling = max(total, 1) if ceiling is None else int(ceiling)
    if total > ceiling:
        raise ValueError(f"{total} photons exceed the ceiling of {ceiling}")
    return FockState(len(occ), {occ: 1.0 + 0j}, ceiling)


def apply_phase(state: FockState, mode: int, theta: float) -> FockState:
    """``exp(i theta n_mode)``."""
    state._check_mode(mode)
    return FockState(
        state.n_modes,
        {k: a * np.exp(1j * theta * k[mode]) for k, a in state.amplitudes.items()},
        state.ceiling,
    )


def beamsplitter_unitary(theta: float, phi: float) -> np.ndarray:
    """Single-photon transfer matrix: column ``j`` is the image of ``a_j^dag``."""
    c, s = math.cos(theta), math.sin(theta)
    e = np.exp(1j * phi)
    return np.array([[c, -np.conj(e) * s], [e * s, c]])


def apply_beamsplitter(state: FockState, m1: int, m2: int, theta: float, phi: float) -> FockState:
    """``exp(theta (e^{i phi} a2^dag a1 - e^{-i phi} a1^dag a2))`` on modes ``m1, m2``.

    Under it ``a1^dag -> cos(theta) a1^dag + e^{i phi} sin(theta) a2^dag`` and
    ``a2^dag -> cos(theta) a2^dag - e^{-i phi} sin(theta) a1^dag``; each basis
    vector is expanded binomially inside its fixed-photon block.
    """
    if m1 == m2:
        raise ValueError("beamsplitter needs two distinct modes")
    state._check_mode(m1)
    state._check_mode(m2)
    c, s = math.cos(theta), math.sin(theta)
    e = np.exp(1j * phi)
    f1 = (c, e * s)  # coefficients of (a1^dag, a2^dag) in the image of a1^dag
    f2 = (-np.conj(e) * s, c)
    out: dict = {}
    for occ, amp in state.amplitudes.items():
        n1, n2 = occ[m1], occ[m2]
        total = n1 + n2
        pref = amp / math.sqrt(math.factorial(n1) * math.factorial(n2))
        for j in range(n1 + 1):
            cj = math.comb(n1, j) * f1[0] ** j * f1[1] ** (n1 - j)
            if cj == 0:
                continue
            for k in range(n2 + 1):
                ck = math.comb(n2, k) * f2[0] ** k * f2[1] ** (n2 - k)
                if ck == 0:
                    continue
                o1 = j + k
                o2 = total - o1
                new = list(occ)
                new[m1], new[m2] = o1, o2
                key = tuple(new)
                val = pref * cj * ck * math.sqrt(math.factorial(o1) * math.factorial(o2))
                out[key] = out.get(key, 0) + val
    return state._pruned(out)


def _collapse(state: FockState, weights: dict, rng) -> int:
    outcomes = sorted(weights)
    p = np.array([weights[o] for o in outcomes])
    total = p.sum()
    if total <= 0:
        raise ValueError("state has zero norm")
    idx = min(int(np.searchsorted(np.cumsum(p), rng.random() * total, side="right")), len(p) - 1)
    return outcomes[idx]


def detect(state: FockState, mode: int, dark_prob: float, rng) -> tuple[int, FockState]:
    """Photon-number measurement of ``mode``; detected photons are absorbed.

    With probability ``dark_prob`` the reported count is one higher than the
    true count; the post-measurement state does not depend on that report.
    """
    state._check_mode(mode)
    weights: dict = {}
    for occ, a in state.amplitudes.items():
        weights[occ[mode]] = weights.get(occ[mode], 0.0) + abs(a) ** 2
    n = _collapse(state, weights, rng)
    norm = math.sqrt(weights[n])
    out = {}
    for occ, a in state.amplitudes.items():
        if occ[mode] == n:
            new = list(occ)
            new[mode] = 0
            out[tuple(new)] = a / norm
    reported = n + (1 if dark_prob and rng.random() < dark_prob else 0)
    return reported, FockState(state.n_modes, out, state.ceiling)


def apply_loss(state: FockState, mode: int, r: float, rng) -> FockState:
    """Loss of each photon in ``mode`` with probability ``r``.

    Equivalent to a beamsplitter of amplitude reflectivity ``sqrt(r)`` into a
    fresh mode that is measured immediately.
    """
    state._check_mode(mode)
    if not 0 <= r <= 1:
        raise ValueError(f"loss {r} outside [0, 1]")
    if r == 0:
        return state.copy()

    def branch(n, k):
        return math.comb(n, k) * r**k * (1 - r) ** (n - k)

    weights: dict = {}
    for occ, a in state.amplitudes.items():
        n = occ[mode]
        for k in range(n + 1):
            weights[k] = weights.get(k, 0.0) + abs(a) ** 2 * branch(n, k)
    k = _collapse(state, weights, rng)
    norm = math.sqrt(weights[k])
    out = {}
    for occ, a in state.amplitudes.items():
        n = occ[mode]
        if n >= k:
            w = branch(n, k)
            if w > 0:
                new = list(occ)
                new[mode] = n - k
                out[tuple(new)] = a * math.sqrt(w) / norm
    return state._pruned(out)
