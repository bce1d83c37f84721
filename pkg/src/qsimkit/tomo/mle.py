"""Linear inversion and maximum-likelihood reconstruction.

Every unknown is a positive matrix ``X = c c^dag`` with ``c`` of width
``rank``.  Outcome probabilities are linear, ``p_m = Tr(F_m X)``; the ascent
direction is ``R c`` with ``R = sum_m (k_m / p_m) F_m``.  After each step
the factor is renormalised by a congruence that restores the constraint
exactly (unit trace, ``Tr_out chi = I``, or ``sum_k E_k = I``) while keeping
positivity, and a backtracking search only accepts steps that do not lower
the log-likelihood.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils.validation import check_is_fitted

from .designs import TomoDataset, measurement_effect, prep_state

__all__ = [
    "DetectorTomography",
    "MleResult",
    "NotInformationallyComplete",
    "ProcessTomography",
    "StateTomography",
    "linear_inversion",
    "partial_trace_out",
    "reconstruct_mle",
]

PROB_FLOOR = 1e-12
KINDS = ("state", "process", "detector")


class NotInformationallyComplete(ValueError):
    pass


@dataclass
class _Problem:
    kind: str
    d: int  # Hilbert-space dimension of the system
    dim: int  # size of each unknown matrix
    n_blocks: int
    block: np.ndarray  # (M,) which unknown each row refers to
    F: np.ndarray  # (M, dim, dim)
    counts: np.ndarray  # (M,)
    group: np.ndarray  # (M,) rows sharing one multinomial


def _outcomes(n: int) -> list[str]:
    return [format(i, f"0{n}b") for i in range(2**n)]


def build_problem(data: TomoDataset, kind: str) -> _Problem:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    n = data.n_qubits
    d = 2**n
    rows_b, rows_f, rows_k, rows_g = [], [], [], []
    for gi, rec in enumerate(data.records):
        extra = set(rec.counts) - set(_outcomes(n))
        if extra:
            raise ValueError(f"unexpected outcome labels {sorted(extra)}")
        if kind != "state" and rec.prep is None:
            raise ValueError(f"{kind} tomography needs a preparation label on every record")
        rho = None if rec.prep is None else prep_state(rec.prep)
        for oi, out in enumerate(_outcomes(n)):
            k = float(rec.counts.get(out, 0))
            if kind == "state":
                rows_b.append(0)
                rows_f.append(measurement_effect(rec.setting, out))
            elif kind == "process":
                rows_b.append(0)
                rows_f.append(np.kron(measurement_effect(rec.setting, out), rho.T))
            else:
                if set(rec.setting) != {"Z"}:
                    raise ValueError("detector data must use the computational-basis setting")
                rows_b.append(oi)
                rows_f.append(rho)
            rows_k.append(k)
            rows_g.append(gi)
    dim = d * d if kind == "process" else d
    return _Problem(kind, d, dim, d if kind == "detector" else 1, np.array(rows_b),
                    np.array(rows_f), np.array(rows_k), np.array(rows_g))


def _hermitian_basis(dim: int) -> np.ndarray:
    """Orthonormal Hermitian basis in the matrix-unit ordering."""
    basis = []
    for i in range(dim):
        for j in range(dim):
            m = np.zeros((dim, dim), dtype=complex)
            if i == j:
                m[i, i] = 1
            elif i < j:
                m[i, j] = m[j, i] = 1 / math.sqrt(2)
            else:
                m[j, i], m[i, j] = -1j / math.sqrt(2), 1j / math.sqrt(2)
            basis.append(m)
    return np.array(basis)


def partial_trace_out(chi: np.ndarray, d: int) -> np.ndarray:
    """Trace over the first (output) factor of a ``d^2 x d^2`` Choi matrix."""
    return np.einsum("aiaj->ij", chi.reshape(d, d, d, d))


def _frequencies(pb: _Problem) -> np.ndarray:
    totals = np.bincount(pb.group, weights=pb.counts)
    if (totals[pb.group] <= 0).any():
        raise ValueError("every setting needs at least one count")
    return pb.counts / totals[pb.group]


def _linear_inversion(pb: _Problem) -> list[np.ndarray]:
    basis = _hermitian_basis(pb.dim)
    nb = len(basis)
    # Re Tr(F G) for every row and basis element
    coef = np.einsum("mab,jba->mj", pb.F, basis).real
    A = np.zeros((len(pb.counts), pb.n_blocks * nb))
    for b in range(pb.n_blocks):
        rows = pb.block == b
        A[rows, b * nb:(b + 1) * nb] = coef[rows]
    rank = np.linalg.matrix_rank(A, tol=1e-9)
    if rank < A.shape[1]:
        raise NotInformationallyComplete(
            f"measurement design is not informationally complete (rank {rank} < {A.shape[1]})")
    x, *_ = np.linalg.lstsq(A, _frequencies(pb), rcond=None)
    return [np.einsum("j,jab->ab", x[b * nb:(b + 1) * nb], basis) for b in range(pb.n_blocks)]


def _clip_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return (v * np.clip(w, 0, None)) @ v.conj().T


def _inv_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    if w.min() <= 1e-14 * max(w.max(), 1e-300):
        raise np.linalg.LinAlgError("constraint matrix is singular")
    return (v / np.sqrt(w)) @ v.conj().T


def _feasible_centre(pb: _Problem) -> list[np.ndarray]:
    if pb.kind == "state":
        return [np.eye(pb.dim) / pb.dim]
    if pb.kind == "process":
        return [np.eye(pb.dim) / pb.d]
    return [np.eye(pb.dim) / pb.n_blocks for _ in range(pb.n_blocks)]


def _project(pb: _Problem, xs: list[np.ndarray]) -> list[np.ndarray]:
    """Eigenvalue clipping plus renormalisation onto the feasible set."""
    if pb.kind == "state":
        x = _clip_psd(xs[0])
        tr = np.trace(x).real
        return [x / tr if tr > 0 else _feasible_centre(pb)[0]]
    if pb.kind == "process":
        x = xs[0]
        for _ in range(200):
            x = _clip_psd(x)
            excess = partial_trace_out(x, pb.d) - np.eye(pb.d)
            if np.abs(excess).max() < 1e-12:
                break
            x = x - np.kron(np.eye(pb.d) / pb.d, excess)
        return [_clip_psd(x)]
    return [_clip_psd(x) for x in xs]


def _retract(pb: _Problem, cs: list[np.ndarray]) -> list[np.ndarray]:
    """Congruence that restores the equality constraint exactly."""
    if pb.kind == "state":
        return [cs[0] / np.linalg.norm(cs[0])]
    if pb.kind == "process":
        c = cs[0]
        r = c.shape[1]
        t = c.reshape(pb.d, pb.d, r)
        T = np.einsum("ais,ajs->ij", t, t.conj())
        m = _inv_sqrt(T)
        return [np.einsum("ij,ajs->ais", m, t).reshape(pb.dim, r)]
    S = sum(c @ c.conj().T for c in cs)
    m = _inv_sqrt(S)
    return [m @ c for c in cs]


def _factor(x: np.ndarray, rank: int) -> np.ndarray:
    w, v = np.linalg.eigh((x + x.conj().T) / 2)
    idx = np.argsort(w)[::-1][:rank]
    return v[:, idx] * np.sqrt(np.clip(w[idx], 0, None))


@dataclass
class MleResult:
    kind: str
    estimate: object  # density matrix, Choi matrix, or list of effects
    loglik_trace: list = field(default_factory=list)
    n_iter: int = 0
    converged: bool = False

    @property
    def loglik(self) -> float:
        return self.loglik_trace[-1]


class _Likelihood:
    def __init__(self, pb: _Problem):
        self.pb = pb
        self.flat = pb.F.transpose(0, 2, 1).reshape(len(pb.counts), -1)
        self.total = pb.counts.sum()

    def probs(self, cs):
        xs = [c @ c.conj().T for c in cs]
        vecs = np.stack([x.ravel() for x in xs])
        return np.einsum("mk,mk->m", self.flat, vecs[self.pb.block]).real

    def value(self, cs) -> float:
        p = np.maximum(self.probs(cs), PROB_FLOOR)
        return float(self.pb.counts @ np.log(p))

    def direction(self, cs):
        p = np.maximum(self.probs(cs), PROB_FLOOR)
        w = self.pb.counts / p / self.total
        out = []
        for b, c in enumerate(cs):
            rows = self.pb.block == b
            R = np.einsum("m,mab->ab", w[rows], self.pb.F[rows])
            out.append(R @ c)
        return out


def linear_inversion(data: TomoDataset, kind: str = "state", project: bool = True):
    """Least-squares estimate from observed frequencies, optionally projected."""
    pb = build_problem(data, kind)
    xs = _linear_inversion(pb)
    if project:
        xs = _project(pb, xs)
    return xs[0] if kind != "detector" else xs


def reconstruct_mle(data: TomoDataset, kind: str = "state", rank: int | None = None,
                    tol: float = 1e-10, max_iter: int = 5000, mix: float = 1e-3) -> MleResult:
    """Maximum-likelihood estimate with the root parameterisation ``X = c c^dag``."""
    pb = build_problem(data, kind)
    rank = pb.dim if rank is None else int(rank)
    if not 1 <= rank <= pb.dim:
        raise ValueError(f"rank must be in [1, {pb.dim}]")
    xs = _project(pb, _linear_inversion(pb))
    centre = _feasible_centre(pb)
    # a little of the maximally mixed point lets clipped directions recover
    xs = [(1 - mix) * x + mix * z for x, z in zip(xs, centre)]
    cs = _retract(pb, [_factor(x, rank) for x in xs])
    lik = _Likelihood(pb)
    value = lik.value(cs)
    trace = [value]
    step = 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        direc = lik.direction(cs)
        accepted = False
        while step > 1e-14:
            trial = _retract(pb, [c + step * g for c, g in zip(cs, direc)])
            new = lik.value(trial)
            if new >= value:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True  # no ascent direction left at machine precision
            break
        change = new - value
        cs, value = trial, new
        trace.append(value)
        step = min(step * 2.0, 1e6)
        if abs(change) <= tol * max(abs(value), 1.0):
            converged = True
            break
    if not converged:
        warnings.warn(f"MLE did not converge in {max_iter} iterations; returning last iterate",
                      ConvergenceWarning, stacklevel=2)
    xs = [c @ c.conj().T for c in cs]
    xs = [(x + x.conj().T) / 2 for x in xs]
    estimate = xs if kind == "detector" else xs[0]
    return MleResult(kind, estimate, trace, it, converged)


class _TomographyEstimator(BaseEstimator):
    _kind = "state"

    def __init__(self, rank=None, tol=1e-10, max_iter=5000):
        self.rank = rank
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X: TomoDataset, y=None):
        if not isinstance(X, TomoDataset):
            X = TomoDataset.from_list(X)
        res = reconstruct_mle(X, self._kind, self.rank, self.tol, self.max_iter)
        self.result_ = res
        self.estimate_ = res.estimate
        self.loglik_ = res.loglik
        self.n_iter_ = res.n_iter
        self.converged_ = res.converged
        return self

    def score(self, X: TomoDataset, y=None) -> float:
        """Log-likelihood of ``X`` under the fitted estimate."""
        check_is_fitted(self, "estimate_")
        pb = build_problem(X, self._kind)
        xs = self.estimate_ if isinstance(self.estimate_, list) else [self.estimate_]
        flat = pb.F.transpose(0, 2, 1).reshape(len(pb.counts), -1)
        vecs = np.stack([x.ravel() for x in xs])
        p = np.einsum("mk,mk->m", flat, vecs[pb.block]).real
        return float(pb.counts @ np.log(np.maximum(p, PROB_FLOOR)))


class StateTomography(_TomographyEstimator):
    """Density matrix from Pauli-setting counts; result in ``density_matrix_``."""

    _kind = "state"

    @property
    def density_matrix_(self):
        check_is_fitted(self, "estimate_")
        return self.estimate_


class ProcessTomography(_TomographyEstimator):
    """Choi matrix (output (x) input, ``Tr_out chi = I``); result in ``choi_``."""

    _kind = "process"

    @property
    def choi_(self):
        check_is_fitted(self, "estimate_")
        return self.estimate_


class DetectorTomography(_TomographyEstimator):
    """POVM effects of a computational-basis detector; result in ``povm_``."""

    _kind = "detector"

    @property
    def povm_(self):
        check_is_fitted(self, "estimate_")
        return self.estimate_
