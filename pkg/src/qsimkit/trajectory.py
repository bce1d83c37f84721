"""Vectorised trajectory engine.

Shots are simulated as rows of a ``(B, 2**n)`` array.  Every shot still owns
an independent stream derived from ``(seed, shot)``: the circuit is compiled
once into steps that each read fixed columns of a per-shot table of uniform
and normal variates, so a shot's outcome does not depend on which batch or
thread it ran in.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .core import ConsistencyError, shot_rng
from .gates import X, batched_gate_matrix, gate_matrix
from .noise import NoiseModel
from .qasm import Circuit

# amplitudes held in memory per batch
_BATCH_AMPLITUDES = 2**18


def apply_same(psi: np.ndarray, n: int, qubits, m: np.ndarray) -> np.ndarray:
    """Apply one ``2^k x 2^k`` matrix to every row."""
    b = psi.shape[0]
    if len(qubits) == 1:
        q = qubits[0]
        view = psi.reshape(b, 2 ** (n - q - 1), 2, 2**q)
        a0, a1 = view[:, :, 0, :], view[:, :, 1, :]
        out = np.empty_like(view)
        out[:, :, 0, :] = m[0, 0] * a0 + m[0, 1] * a1
        out[:, :, 1, :] = m[1, 0] * a0 + m[1, 1] * a1
        return out.reshape(b, -1)
    k = len(qubits)
    axes = [1 + n - 1 - q for q in qubits]
    t = psi.reshape((b,) + (2,) * n)
    res = np.tensordot(m.reshape((2,) * (2 * k)), t, axes=(list(range(k, 2 * k)), axes))
    res = np.moveaxis(res, list(range(k)), axes)
    return np.ascontiguousarray(res).reshape(b, -1)


def apply_rowwise(psi: np.ndarray, n: int, qubits, mats: np.ndarray) -> np.ndarray:
    """Apply ``mats[i]`` to row ``i``."""
    b = psi.shape[0]
    k = len(qubits)
    axes = [1 + n - 1 - q for q in qubits]
    tail = list(range(n + 1 - k, n + 1))
    t = np.moveaxis(psi.reshape((b,) + (2,) * n), axes, tail)
    shape = t.shape
    t = t.reshape(b, -1, 2**k)
    out = np.einsum("bij,brj->bri", mats, t).reshape(shape)
    return np.ascontiguousarray(np.moveaxis(out, tail, axes)).reshape(b, -1)


def _choose(weights: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Row-wise inverse-CDF pick; ``weights`` is ``(A,)`` or ``(B, A)``."""
    cdf = np.cumsum(weights, axis=-1)
    if cdf.ndim == 1:
        idx = np.searchsorted(cdf, u * cdf[-1], side="right")
    else:
        idx = (cdf <= (u * cdf[:, -1])[:, None]).sum(axis=1)
    return np.minimum(idx, weights.shape[-1] - 1)


@dataclass
class _Plan:
    n: int
    n_clbits: int
    steps: list
    n_uniform: int
    n_normal: int


class _Columns:
    def __init__(self):
        self.u = 0
        self.g = 0

    def uniform(self) -> int:
        self.u += 1
        return self.u - 1

    def normal(self) -> int:
        self.g += 1
        return self.g - 1


def compile_plan(circuit: Circuit, noise: NoiseModel | None) -> _Plan:
    n = max(circuit.n_qubits, 1)
    cols = _Columns()
    steps = []
    nm_cols = {}
    if noise is not None:
        for q in range(n):
            p = noise.prep.get(q, noise.prep_default)
            if p:
                steps.append(("flip", q, p, cols.uniform()))
    for instr in circuit.instructions:
        kind = instr.kind
        if kind == "BARRIER":
            continue
        if kind == "MEASURE":
            q = instr.qubits[0]
            p = 0.0 if noise is None else noise.readout_p.get(q, noise.readout_default)
            steps.append(("measure", q, instr.clbits[0], cols.uniform(), p, cols.uniform() if p else None))
            continue
        if kind == "RESET":
            steps.append(("reset", instr.qubits[0], cols.uniform()))
            continue
        gn = None if noise is None else noise.gates.get(kind)
        if gn is not None and gn.angle_errors:
            errs = []
            for idx, err in sorted(gn.angle_errors.items()):
                cm = cols.normal() if err.sigma_m else None
                cnm = None
                if err.sigma_nm:
                    key = (kind, instr.qubits, idx)
                    if key not in nm_cols:
                        nm_cols[key] = cols.normal()
                    cnm = nm_cols[key]
                errs.append((idx, err, cm, cnm))
            steps.append(("noisy_gate", instr.qubits, kind, np.array(instr.params, dtype=float), errs))
        else:
            steps.append(("gate", instr.qubits, gate_matrix(kind, instr.params)))
        if gn is not None:
            for u in gn.coherent:
                for q in instr.qubits:
                    steps.append(("gate", (q,), u))
            for ch in gn.channels:
                targets = [instr.qubits] if ch.n_qubits == len(instr.qubits) else [(q,) for q in instr.qubits]
                for t in targets:
                    steps.append(("channel", t, ch, cols.uniform()))
        if noise is not None and noise.durations:
            for q in instr.qubits:
                ch = noise.relaxation_channel(q, kind)
                if ch is not None:
                    steps.append(("channel", (q,), ch, cols.uniform()))
    return _Plan(n, circuit.n_clbits, steps, cols.u, cols.g)


def _apply_channel(psi, n, targets, ch, u):
    if ch.is_mixed_unitary:
        weights, unitaries = ch._mixture
        branch = _choose(weights, u)
        eye = np.eye(ch.dim)
        for a in np.unique(branch):
            if np.abs(unitaries[a] - eye).max() < 1e-15:
                continue
            mask = branch == a
            psi[mask] = apply_same(psi[mask], n, targets, unitaries[a])
        return psi
    outs = [apply_same(psi, n, targets, k) for k in ch.operators]
    probs = np.stack([np.einsum("bi,bi->b", o.conj(), o).real for o in outs], axis=1)
    total = probs.sum(axis=1)
    if np.abs(total - 1).max() > 1e-9 or (probs < -1e-9).any():
        raise ConsistencyError(f"{ch.label}: branch probabilities sum to {total.min()!r}..{total.max()!r}")
    branch = _choose(np.clip(probs, 0, None), u)
    rows = np.arange(psi.shape[0])
    chosen = np.stack(outs, axis=0)[branch, rows]
    return chosen / np.sqrt(probs[rows, branch])[:, None]


def _measure(psi, n, q, u):
    b = psi.shape[0]
    view = psi.reshape(b, 2 ** (n - q - 1), 2, 2**q)
    p0 = np.einsum("bij,bij->b", view[:, :, 0, :].conj(), view[:, :, 0, :]).real
    if (p0 < -1e-9).any() or (p0 > 1 + 1e-9).any() or not np.all(np.isfinite(p0)):
        raise ConsistencyError("measurement probability outside [0, 1]")
    p0 = np.clip(p0, 0.0, 1.0)
    bit = (u >= p0).astype(np.int64)
    keep = np.where(bit == 0, p0, 1 - p0)
    out = np.zeros_like(view)
    rows = np.arange(b)
    out[rows, :, bit, :] = view[rows, :, bit, :] / np.sqrt(keep)[:, None, None]
    return bit, out.reshape(b, -1)


def run_batch(plan: _Plan, uniforms: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """Execute one batch; returns ``(B, n_clbits)`` classical bits."""
    b = uniforms.shape[0]
    n = plan.n
    psi = np.zeros((b, 2**n), dtype=complex)
    psi[:, 0] = 1.0
    clbits = np.zeros((b, plan.n_clbits), dtype=np.int64)
    flip = np.stack([np.eye(2, dtype=complex), X])
    for step in plan.steps:
        op = step[0]
        if op == "gate":
            psi = apply_same(psi, n, step[1], step[2])
        elif op == "noisy_gate":
            _, qubits, kind, base, errs = step
            params = np.tile(base, (b, 1))
            for idx, err, cm, cnm in errs:
                params[:, idx] += err.theta_c
                if cm is not None:
                    params[:, idx] += err.sigma_m * normals[:, cm]
                if cnm is not None:
                    params[:, idx] += err.sigma_nm * normals[:, cnm]
            psi = apply_rowwise(psi, n, qubits, batched_gate_matrix(kind, params))
        elif op == "channel":
            psi = _apply_channel(psi, n, step[1], step[2], uniforms[:, step[3]])
        elif op == "flip":
            _, q, p, col = step
            mask = uniforms[:, col] < p
            if mask.any():
                psi[mask] = apply_same(psi[mask], n, (q,), X)
        elif op == "measure":
            _, q, c, col, p, rcol = step
            bit, psi = _measure(psi, n, q, uniforms[:, col])
            if rcol is not None:
                bit = bit ^ (uniforms[:, rcol] < p)
            clbits[:, c] = bit
        elif op == "reset":
            bit, psi = _measure(psi, n, step[1], uniforms[:, step[2]])
            psi = apply_rowwise(psi, n, (step[1],), flip[bit])
    norms = np.einsum("bi,bi->b", psi.conj(), psi).real
    if np.abs(norms - 1).max() > 1e-8:
        raise ConsistencyError("trajectory lost normalisation")
    return clbits


def _draws(plan: _Plan, rngs) -> tuple[np.ndarray, np.ndarray]:
    u = np.empty((len(rngs), plan.n_uniform))
    g = np.empty((len(rngs), plan.n_normal))
    for i, rng in enumerate(rngs):
        if plan.n_uniform:
            u[i] = rng.random(plan.n_uniform)
        if plan.n_normal:
            g[i] = rng.standard_normal(plan.n_normal)
    return u, g


def bitstrings(clbits: np.ndarray) -> list[str]:
    return ["".join("1" if v else "0" for v in row[::-1]) for row in clbits]


def run_trajectories(circuit: Circuit, noise, seed: int, lo: int, hi: int) -> Counter:
    """Counts of shots ``lo <= i < hi``; shot ``i`` uses the stream ``(seed, i)``."""
    plan = compile_plan(circuit, noise)
    batch = max(1, _BATCH_AMPLITUDES >> plan.n)
    counts = Counter()
    weights = 1 << np.arange(plan.n_clbits, dtype=np.int64)
    for start in range(lo, hi, batch):
        stop = min(start + batch, hi)
        u, g = _draws(plan, [shot_rng(seed, i) for i in range(start, stop)])
        bits = run_batch(plan, u, g)
        codes, freq = np.unique(bits @ weights, return_counts=True)
        for code, f in zip(codes.tolist(), freq.tolist()):
            counts[format(code, f"0{plan.n_clbits}b") if plan.n_clbits else ""] += f
    return counts


def run_single(circuit: Circuit, noise, rng: np.random.Generator) -> str:
    plan = compile_plan(circuit, noise)
    u, g = _draws(plan, [rng])
    return bitstrings(run_batch(plan, u, g))[0]
