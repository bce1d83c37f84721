"""Effective Hamiltonians from Choi matrices, and target fidelities."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import schur

__all__ = ["QhtResult", "entanglement_fidelity", "fidelity_to_target", "qht_extract"]


@dataclass
class QhtResult:
    hamiltonian: np.ndarray
    unitary: np.ndarray
    top_eigenvalue: float
    flags: list = field(default_factory=list)


def qht_extract(chi, tau: float = 1.0, noisy_threshold: float = 0.8) -> QhtResult:
    """``H = i ln(U) / tau`` from the dominant Kraus operator of ``chi``.

    ``U = sqrt(d) * reshape(e, (d, d))`` for the top eigenvector ``e``.  The
    global phase is fixed so ``det U`` has argument 0; of the ``d`` phases that
    do so, the one with the largest ``Re Tr U`` is kept (ties go to the
    principal root).  ``U`` is then projected to the nearest unitary and the
    principal logarithm is used.

    Because the Choi matrix carries no global phase, the result equals the
    true generator only when the eigenphases of ``H tau`` (traceless part)
    lie inside ``(-pi/d, pi/d)``.
    """
    chi = np.asarray(chi, dtype=complex)
    D = chi.shape[0]
    d = int(round(math.sqrt(D)))
    if d * d != D or chi.shape != (D, D):
        raise ValueError("Choi matrix must be d^2 x d^2")
    if tau <= 0:
        raise ValueError("tau must be positive")
    chi = chi * (d / np.trace(chi).real)
    w, v = np.linalg.eigh((chi + chi.conj().T) / 2)
    lam = float(w[-1])
    flags = []
    if lam < noisy_threshold * d:
        flags.append(f"top eigenvalue {lam:.4g} below {noisy_threshold}*d; channel far from unitary")
    e = v[:, -1]
    k = int(np.argmax(np.abs(e)))
    e = e * (abs(e[k]) / e[k])
    u = math.sqrt(d) * e.reshape(d, d)
    arg = float(np.angle(np.linalg.det(u)))
    if arg <= -math.pi + 1e-12:
        arg = math.pi
    # arg(det) = 0 leaves a d-th root of unity free: keep the one closest to
    # the identity (smallest generator), preferring the principal root on ties
    roots = [np.exp(-1j * (arg + 2 * math.pi * j) / d) for j in range(d)]
    scores = [np.trace(r * u).real for r in roots]
    best = max(range(d), key=lambda j: (round(scores[j], 9), -j))
    u = u * roots[best]
    a, _, bh = np.linalg.svd(u)
    u = a @ bh
    t, z = schur(u, output="complex")
    phases = np.angle(np.diag(t))
    if np.any(np.abs(phases) > math.pi - 1e-6):
        flags.append("eigenphase near +-pi; logarithm branch is ambiguous")
    h = -(z * phases) @ z.conj().T / tau
    h = (h + h.conj().T) / 2
    for f in flags:
        warnings.warn(f, RuntimeWarning, stacklevel=2)
    return QhtResult(h, u, lam, flags)


def fidelity_to_target(rho, psi) -> float:
    """``<psi| rho |psi>`` for a normalised pure target."""
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi, dtype=complex).ravel()
    if rho.shape != (psi.size, psi.size):
        raise ValueError("dimension mismatch between state and target")
    psi = psi / np.linalg.norm(psi)
    return float(np.clip(np.vdot(psi, rho @ psi).real, 0.0, 1.0))


def entanglement_fidelity(chi, u_target) -> float:
    """``<Phi|(U^dag (x) I) rho_choi (U (x) I)|Phi>`` with ``rho_choi = chi / Tr chi``."""
    chi = np.asarray(chi, dtype=complex)
    u = np.asarray(u_target, dtype=complex)
    d = u.shape[0]
    if chi.shape != (d * d, d * d):
        raise ValueError("dimension mismatch between Choi matrix and target unitary")
    rho = chi / np.trace(chi).real
    vec = u.reshape(-1) / math.sqrt(d)  # (U (x) I)|Phi>, output index first
    return float(np.clip(np.vdot(vec, rho @ vec).real, 0.0, 1.0))
