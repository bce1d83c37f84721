"""Compile arbitrary two-qubit unitaries into native gates (KAK form)."""
from __future__ import annotations

import math

import numpy as np

from ..gates import PAULI, u_params
from ..qasm import Circuit

__all__ = ["append_two_qubit_unitary", "controlled_u", "kak_decompose", "multi_controlled_u", "split_local"]

# columns: the magic (Bell-like) basis in which local unitaries are real orthogonal
MAGIC = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]],
    dtype=complex,
) / math.sqrt(2)

_XX = np.kron(PAULI["X"], PAULI["X"])
_YY = np.kron(PAULI["Y"], PAULI["Y"])
_ZZ = np.kron(PAULI["Z"], PAULI["Z"])
# XX, YY, ZZ are diagonal in the magic basis; rows hold their eigenvalues
_LAMBDA = np.real(np.array([np.diag(MAGIC.conj().T @ p @ MAGIC) for p in (_XX, _YY, _ZZ)]))


def split_local(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Factor ``m = A (x) B`` (up to phase) via the rank-one rearrangement."""
    r = m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(r)
    if s[1] > 1e-6 * s[0]:
        raise ValueError("matrix is not a tensor product")
    a = (u[:, 0] * math.sqrt(s[0])).reshape(2, 2)
    b = (vh[0] * math.sqrt(s[0])).reshape(2, 2)
    return a, b


def kak_decompose(u: np.ndarray, rng=None):
    """``u ~ (A1 (x) B1) exp(i(a XX + b YY + c ZZ)) (A2 (x) B2)``.

    Returns ``(A1, B1), (a, b, c), (A2, B2)``; equality holds up to a global phase.
    """
    u = np.asarray(u, dtype=complex)
    u = u / np.linalg.det(u) ** 0.25
    up = MAGIC.conj().T @ u @ MAGIC
    m = up.T @ up
    rng = np.random.default_rng(0) if rng is None else rng
    # Re M and Im M commute, so a generic real combination shares their eigenvectors
    for _ in range(20):
        r = rng.normal()
        _, o = np.linalg.eigh(m.real + r * m.imag)
        d2 = np.diag(o.T @ m @ o)
        if np.abs(o.T @ m @ o - np.diag(d2)).max() < 1e-9:
            break
    else:
        raise np.linalg.LinAlgError("could not diagonalise the symmetric unitary")
    if np.linalg.det(o) < 0:
        o[:, 0] *= -1
    d = np.sqrt(d2)
    if np.prod(d).real < 0:
        d[0] *= -1
    k1 = up @ o @ np.diag(1 / d)
    left = MAGIC @ k1 @ MAGIC.conj().T
    right = MAGIC @ o.T @ MAGIC.conj().T
    phases = np.angle(d)
    a, b, c = _LAMBDA @ phases / 4
    return split_local(left), (a, b, c), split_local(right)


def append_two_qubit_unitary(circ: Circuit, u: np.ndarray, qa: int, qb: int, rng=None) -> Circuit:
    """Append native gates implementing ``u`` on ``(qa, qb)`` (``qa`` most significant)."""
    (a1, b1), (a, b, c), (a2, b2) = kak_decompose(u, rng)
    circ.u(*u_params(a2), qa)
    circ.u(*u_params(b2), qb)
    # exp(i a XX) exp(i b YY) exp(i c ZZ); YY = (S(x)S) XX (S(x)S)^dag
    circ.rxx(-a, qa, qb)
    circ.rz(-math.pi / 2, qa)
    circ.rz(-math.pi / 2, qb)
    circ.rxx(-b, qa, qb)
    circ.rz(math.pi / 2, qa)
    circ.rz(math.pi / 2, qb)
    circ.rzz(-c, qa, qb)
    circ.u(*u_params(a1), qa)
    circ.u(*u_params(b1), qb)
    return circ


def _ry(circ: Circuit, theta: float, q: int):
    if abs(theta) > 1e-15:
        circ.u(theta, 0.0, 0.0, q)


def _rz(circ: Circuit, theta: float, q: int):
    # U(0, 0, theta) equals RZ(theta) up to a global phase
    if abs(theta) > 1e-15:
        circ.u(0.0, 0.0, theta, q)


def controlled_u(circ: Circuit, u: np.ndarray, control: int, target: int) -> Circuit:
    """Singly controlled ``u`` from two CX and single-qubit gates (``A X B X C`` form)."""
    u = np.asarray(u, dtype=complex)
    theta, phi, lam = u_params(u)
    ref = np.array([[math.cos(theta / 2), -np.exp(1j * lam) * math.sin(theta / 2)],
                    [np.exp(1j * phi) * math.sin(theta / 2), np.exp(1j * (phi + lam)) * math.cos(theta / 2)]])
    psi = float(np.angle(np.trace(ref.conj().T @ u)))
    # u = e^{i alpha} Rz(phi) Ry(theta) Rz(lam)
    alpha = psi + (phi + lam) / 2
    _rz(circ, (lam - phi) / 2, target)
    circ.cx(control, target)
    _rz(circ, -(lam + phi) / 2, target)
    _ry(circ, -theta / 2, target)
    circ.cx(control, target)
    _ry(circ, theta / 2, target)
    _rz(circ, phi, target)
    if abs(alpha) > 1e-15:
        circ.u(0.0, 0.0, alpha, control)
    return circ


def _sqrtm_unitary(u: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eig(u)
    # unitary matrices are normal; re-orthonormalise degenerate eigenvectors
    v, _ = np.linalg.qr(v)
    return v @ np.diag(np.sqrt(w)) @ v.conj().T


def multi_controlled_u(circ: Circuit, u: np.ndarray, controls, target: int) -> Circuit:
    """``u`` on ``target`` when every control is 1; ancilla-free recursion.

    ``C^n(U) = C(V)[c_n] . C^{n-1}X . C(V^dag)[c_n] . C^{n-1}X . C^{n-1}(V)`` with
    ``V^2 = U``.
    """
    controls = list(controls)
    u = np.asarray(u, dtype=complex)
    if not controls:
        circ.u(*u_params(u), target)
        return circ
    if len(controls) == 1:
        return controlled_u(circ, u, controls[0], target)
    v = _sqrtm_unitary(u)
    x = PAULI["X"]
    last, rest = controls[-1], controls[:-1]
    controlled_u(circ, v, last, target)
    if len(rest) == 1:
        circ.cx(rest[0], last)
    else:
        multi_controlled_u(circ, x, rest, last)
    controlled_u(circ, v.conj().T, last, target)
    if len(rest) == 1:
        circ.cx(rest[0], last)
    else:
        multi_controlled_u(circ, x, rest, last)
    multi_controlled_u(circ, v, rest, target)
    return circ
