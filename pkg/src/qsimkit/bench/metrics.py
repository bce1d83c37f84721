"""Distribution fidelity and heavy-output statistics."""
from __future__ import annotations

import math

import numpy as np

__all__ = ["fidelity", "h_est", "heavy_set"]


def _distribution(p, name):
    p = np.asarray(p, dtype=float).ravel()
    if (p < -1e-12).any():
        raise ValueError(f"{name} has negative entries")
    if abs(p.sum() - 1) > 1e-6:
        raise ValueError(f"{name} sums to {p.sum():.8g}, not 1")
    return np.clip(p, 0, None)


def fidelity(p, q) -> float:
    """Classical (Bhattacharyya) fidelity ``(sum_m sqrt(p_m q_m))^2``."""
    p, q = _distribution(p, "p"), _distribution(q, "q")
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.size} vs {q.size}")
    return float(min(np.sqrt(p * q).sum() ** 2, 1.0))


def h_est(n_h: int, n_c: int, n_s: int, sigma_factor: float = 1.0) -> float:
    """Lower estimate of the heavy-output probability.

    ``(n_h - k*sqrt(n_h*(n_s - n_h/n_c))) / (n_c*n_s)`` with ``k = sigma_factor``;
    ``k = 2`` gives the common two-sigma variant.
    """
    if n_c < 1 or n_s < 1:
        raise ValueError("n_c and n_s must be positive")
    if not 0 <= n_h <= n_c * n_s:
        raise ValueError(f"n_h = {n_h} outside [0, n_c*n_s]")
    radicand = n_h * (n_s - n_h / n_c)
    if radicand < -1e-9:
        raise ValueError("inconsistent counts give a negative radicand")
    return (n_h - sigma_factor * math.sqrt(max(radicand, 0.0))) / (n_c * n_s)


def heavy_set(ideal) -> set:
    """Indices whose probability is strictly above the median."""
    p = np.asarray(ideal, dtype=float).ravel()
    med = np.median(p)
    return set(np.flatnonzero(p > med).tolist())
