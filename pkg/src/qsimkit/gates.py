"""Gate matrices for every unitary instruction kind.

Two-qubit matrices are written in the basis ``|x_a x_b>`` where ``a`` is the
first listed qubit (most significant), e.g. ``cx a,b`` has ``a`` as control.
"""
from __future__ import annotations

import cmath
import math

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}

CX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
    dtype=complex,
)


def u_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    """OpenQASM 2.0 ``U(theta, phi, lambda)``; ``U(pi, 0, pi)`` equals X exactly."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [c, -cmath.exp(1j * lam) * s],
            [cmath.exp(1j * phi) * s, cmath.exp(1j * (phi + lam)) * c],
        ]
    )


def r_matrix(theta: float, phi: float) -> np.ndarray:
    """Rotation by ``theta`` about the equatorial axis at angle ``phi`` from x."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [c, -1j * cmath.exp(-1j * phi) * s],
            [-1j * cmath.exp(1j * phi) * s, c],
        ]
    )


def rx_matrix(theta: float) -> np.ndarray:
    return r_matrix(theta, 0.0)


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.array([[cmath.exp(-0.5j * theta), 0], [0, cmath.exp(0.5j * theta)]])


def rxx_matrix(theta: float) -> np.ndarray:
    """``exp(-i theta X(x)X)`` -- note: no factor 1/2 on the angle."""
    c, s = math.cos(theta), -1j * math.sin(theta)
    return np.array(
        [[c, 0, 0, s], [0, c, s, 0], [0, s, c, 0], [s, 0, 0, c]],
        dtype=complex,
    )


def rzz_matrix(theta: float) -> np.ndarray:
    """``exp(-i theta Z(x)Z)``."""
    a, b = cmath.exp(-1j * theta), cmath.exp(1j * theta)
    return np.diag([a, b, b, a])


def gate_matrix(kind: str, params=()) -> np.ndarray:
    if kind == "U":
        return u_matrix(*params)
    if kind == "CX":
        return CX
    if kind == "R":
        return r_matrix(*params)
    if kind == "RX":
        return rx_matrix(*params)
    if kind == "RY":
        return ry_matrix(*params)
    if kind == "RZ":
        return rz_matrix(*params)
    if kind == "RXX":
        return rxx_matrix(*params)
    if kind == "RZZ":
        return rzz_matrix(*params)
    raise ValueError(f"{kind} is not a unitary gate kind")


def u_params(matrix) -> tuple[float, float, float]:
    """Angles ``(theta, phi, lam)`` with ``U(theta, phi, lam)`` equal to ``matrix`` up to phase."""
    m = np.asarray(matrix, dtype=complex)
    det = np.linalg.det(m)
    m = m / np.sqrt(det)
    theta = 2 * math.atan2(abs(m[1, 0]), abs(m[0, 0]))
    # in SU(2) form: m00 = e^{-i(phi+lam)/2} c,  m10 = e^{i(phi-lam)/2} s
    if abs(m[0, 0]) > 1e-12:
        plus = -2 * cmath.phase(m[0, 0])
    else:
        plus = 0.0
    if abs(m[1, 0]) > 1e-12:
        minus = 2 * cmath.phase(m[1, 0])
    else:
        minus = 0.0
    if abs(m[0, 0]) <= 1e-12:
        plus = minus  # lam free; pick lam = 0
    if abs(m[1, 0]) <= 1e-12:
        minus = plus  # phi free relative; pick lam = 0
    phi = (plus + minus) / 2
    lam = (plus - minus) / 2
    return theta, phi, lam


def pauli_matrix(label: str) -> np.ndarray:
    """Dense matrix of a Pauli string; character ``k`` acts on qubit ``k``."""
    out = np.ones((1, 1), dtype=complex)
    for ch in label:
        # qubit k is bit k of the index, so later characters are more significant
        out = np.kron(PAULI[ch], out)
    return out


def batched_gate_matrix(kind: str, params: np.ndarray) -> np.ndarray:
    """Stack of matrices for per-row angles; ``params`` has shape ``(B, n_params)``."""
    p = np.asarray(params, dtype=float)
    b = p.shape[0]
    if kind == "CX":
        return np.broadcast_to(CX, (b, 4, 4))
    if kind in ("U", "R", "RX", "RY"):
        th = p[:, 0]
        c, s = np.cos(th / 2), np.sin(th / 2)
        out = np.empty((b, 2, 2), dtype=complex)
        if kind == "U":
            ephi, elam = np.exp(1j * p[:, 1]), np.exp(1j * p[:, 2])
            out[:, 0, 0], out[:, 0, 1] = c, -elam * s
            out[:, 1, 0], out[:, 1, 1] = ephi * s, ephi * elam * c
        elif kind == "RY":
            out[:, 0, 0], out[:, 0, 1], out[:, 1, 0], out[:, 1, 1] = c, -s, s, c
        else:
            phi = p[:, 1] if kind == "R" else np.zeros(b)
            out[:, 0, 0] = out[:, 1, 1] = c
            out[:, 0, 1] = -1j * np.exp(-1j * phi) * s
            out[:, 1, 0] = -1j * np.exp(1j * phi) * s
        return out
    if kind == "RZ":
        out = np.zeros((b, 2, 2), dtype=complex)
        out[:, 0, 0], out[:, 1, 1] = np.exp(-0.5j * p[:, 0]), np.exp(0.5j * p[:, 0])
        return out
    if kind == "RXX":
        out = np.zeros((b, 4, 4), dtype=complex)
        c, s = np.cos(p[:, 0]), -1j * np.sin(p[:, 0])
        for i in range(4):
            out[:, i, i] = c
            out[:, i, 3 - i] = s
        return out
    if kind == "RZZ":
        out = np.zeros((b, 4, 4), dtype=complex)
        a, e = np.exp(-1j * p[:, 0]), np.exp(1j * p[:, 0])
        out[:, 0, 0], out[:, 1, 1], out[:, 2, 2], out[:, 3, 3] = a, e, e, a
        return out
    raise ValueError(f"{kind} is not a unitary gate kind")
