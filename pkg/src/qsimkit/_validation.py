"""Input checks shared by the estimators and public functions."""
from __future__ import annotations

import numpy as np


class UnitarityError(ValueError):
    """A matrix that must be unitary is not, beyond tolerance."""


def check_square(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def check_unitary(u, tol: float = 1e-10, name: str = "unitary") -> np.ndarray:
    u = check_square(u, name)
    err = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()
    if err > tol:
        raise UnitarityError(f"{name} is not unitary (max |U^dag U - I| = {err:.2e})")
    return u


def check_hermitian(a, tol: float = 1e-10, name: str = "matrix") -> np.ndarray:
    a = check_square(a, name)
    if np.abs(a - a.conj().T).max() > tol:
        raise ValueError(f"{name} is not Hermitian")
    return a


def check_probability(p, name: str = "p") -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} = {p} outside [0, 1]")
    return p


def check_counts(counts, name: str = "counts") -> np.ndarray:
    """Non-negative integer count array."""
    arr = np.asarray(counts)
    if arr.size and (np.any(arr < 0) or not np.all(np.isfinite(arr))):
        raise ValueError(f"{name} must be non-negative and finite")
    if arr.size and np.any(np.abs(arr - np.round(arr)) > 1e-9):
        raise ValueError(f"{name} must be integers")
    return np.round(arr).astype(np.int64)


def check_positive_int(n, name: str = "n") -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def check_random_state(seed) -> np.random.Generator:
    """Generator from ``None``, an int seed, or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
