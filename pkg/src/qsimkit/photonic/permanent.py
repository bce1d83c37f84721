"""Matrix permanents: Gray-code Ryser and a brute-force reference."""
from __future__ import annotations

import itertools

import numba
import numpy as np

MAX_PERMANENT_SIZE = 30


@numba.njit(cache=True)
def _ryser_gray(a):
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    row_sums = np.zeros(n, dtype=np.complex128)
    total = 0.0 + 0.0j
    size = 0  # popcount of the current Gray code
    gray = 0
    for k in range(1, 1 << n):
        j = 0
        while not (k >> j) & 1:
            j += 1
        gray ^= 1 << j
        if (gray >> j) & 1:
            size += 1
            for i in range(n):
                row_sums[i] += a[i, j]
        else:
            size -= 1
            for i in range(n):
                row_sums[i] -= a[i, j]
        prod = 1.0 + 0.0j
        for i in range(n):
            prod *= row_sums[i]
        if (n - size) & 1:
            total -= prod
        else:
            total += prod
    return total


def permanent(a) -> complex:
    """Permanent by Ryser's formula with Gray-code subset order, ``O(n 2^n)``."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_PERMANENT_SIZE:
        raise ValueError(f"matrix of size {a.shape[0]} exceeds the {MAX_PERMANENT_SIZE} limit")
    return complex(_ryser_gray(a))


def permanent_naive(a) -> complex:
    """Sum over all permutations; the reference for small matrices."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    rows = np.arange(n)
    return complex(sum(np.prod(a[rows, list(p)]) for p in itertools.permutations(range(n))))


@numba.njit(cache=True)
def laplace_minors(b):
    """Permanents of ``b`` with each column removed in turn.

    ``b`` is ``(k-1) x k``; entry ``l`` of the result is ``Per(b[:, cols != l])``.
    One Gray-code pass over row subsets plus prefix/suffix products gives
    all ``k`` minors in ``O(k 2^(k-1))``.
    """
    p, k = b.shape
    out = np.zeros(k, dtype=np.complex128)
    if p == 0:
        out[0] = 1.0
        return out
    v = np.zeros(k, dtype=np.complex128)
    prefix = np.empty(k + 1, dtype=np.complex128)
    suffix = np.empty(k + 1, dtype=np.complex128)
    gray = 0
    size = 0
    for s in range(1, 1 << p):
        j = 0
        while not (s >> j) & 1:
            j += 1
        gray ^= 1 << j
        if (gray >> j) & 1:
            size += 1
            for c in range(k):
                v[c] += b[j, c]
        else:
            size -= 1
            for c in range(k):
                v[c] -= b[j, c]
        prefix[0] = 1.0
        for c in range(k):
            prefix[c + 1] = prefix[c] * v[c]
        suffix[k] = 1.0
        for c in range(k - 1, -1, -1):
            suffix[c] = suffix[c + 1] * v[c]
        sign = -1.0 if (p - size) & 1 else 1.0
        for l in range(k):
            out[l] += sign * prefix[l] * suffix[l + 1]
    return out
