"""QUBO problems in spin form and encoders for linear systems and ODEs.

Objectives are stored in spin variables ``z in {+1, -1}``:
``f(z) = sum_{i<j} s_ij z_i z_j + sum_i s_ii z_i + offset`` with bits
``q = (1 - z) / 2``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "OdeEncoder",
    "QuboProblem",
    "binary_to_spin",
    "brute_force",
    "fixed_point_matrix",
    "maxcut_problem",
    "qubo_from_linear_system",
    "qubo_from_ode",
    "random_maxcut",
    "refine",
]


@dataclass
class QuboProblem:
    """Symmetric spin couplings ``s`` (diagonal = linear terms) plus a constant.

    ``decode_matrix``/``decode_shift`` map bits ``q`` to the original
    variables ``x = D q + x0`` for encoder-built problems.
    """

    s: np.ndarray
    offset: float = 0.0
    decode_matrix: np.ndarray | None = None
    decode_shift: np.ndarray | None = None
    source: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValueError("coupling matrix must be square")
        if not np.allclose(s, s.T, atol=1e-12):
            raise ValueError("coupling matrix must be symmetric")
        if not np.all(np.isfinite(s)):
            raise ValueError("couplings must be finite")
        self.s = s

    @property
    def n_vars(self) -> int:
        return self.s.shape[0]

    def linear(self) -> np.ndarray:
        return np.diag(self.s).copy()

    def pairs(self):
        """Non-zero ``(i, j, s_ij)`` with ``i < j``."""
        n = self.n_vars
        return [(i, j, self.s[i, j]) for i in range(n) for j in range(i + 1, n) if self.s[i, j] != 0]

    def energy(self, z) -> np.ndarray:
        """Objective for spin rows ``z`` (shape ``(..., n)``), offset included."""
        z = np.asarray(z, dtype=float)
        off = np.triu(self.s, 1)
        return np.einsum("...i,ij,...j->...", z, off, z) + z @ self.linear() + self.offset

    def energy_bits(self, q) -> np.ndarray:
        return self.energy(1 - 2 * np.asarray(q, dtype=float))

    def decode(self, q) -> np.ndarray:
        if self.decode_matrix is None:
            raise ValueError("problem has no decode map")
        return np.asarray(q, dtype=float) @ self.decode_matrix.T + self.decode_shift

    def decode_spins(self, z) -> np.ndarray:
        return self.decode((1 - np.asarray(z, dtype=float)) / 2)

    def to_dict(self) -> dict:
        terms = [[i, i, float(self.s[i, i])] for i in range(self.n_vars) if self.s[i, i] != 0]
        terms += [[i, j, float(v)] for i, j, v in self.pairs()]
        return {"n": self.n_vars, "terms": terms, "offset": self.offset}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "QuboProblem":
        n = int(data["n"])
        s = np.zeros((n, n))
        for i, j, v in data["terms"]:
            i, j = int(i), int(j)
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"term index ({i}, {j}) out of range for n={n}")
            s[i, j] = s[j, i] = float(v)
        return cls(s, float(data.get("offset", 0.0)))

    @classmethod
    def from_json(cls, path) -> "QuboProblem":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def binary_to_spin(M, c, const: float = 0.0) -> tuple[np.ndarray, float]:
    """Rewrite ``q^T M q + c^T q + const`` in spins via ``q = (1 - z)/2``."""
    M = np.asarray(M, dtype=float)
    M = (M + M.T) / 2
    c = np.asarray(c, dtype=float)
    ones = np.ones(len(c))
    s = M / 2
    np.fill_diagonal(s, -(M @ ones) / 2 - c / 2)
    offset = ones @ M @ ones / 4 + np.trace(M) / 4 + c.sum() / 2 + const
    return s, float(offset)


def fixed_point_matrix(n: int, k: int, scale: float = 1.0) -> np.ndarray:
    """``x_i = scale * (-q_{i,0} + sum_{j>=1} 2^-j q_{i,j})``; bits are variable-major."""
    if k < 2:
        raise ValueError("need at least two bits per variable")
    weights = np.array([-1.0] + [2.0**-j for j in range(1, k)]) * scale
    D = np.zeros((n, n * k))
    for i in range(n):
        D[i, i * k:(i + 1) * k] = weights
    return D


def _quadratic_to_qubo(Q, L, const, D, shift, source=None) -> QuboProblem:
    """``x^T Q x + L^T x + const`` with ``x = D q + shift``."""
    Q = np.asarray(Q, dtype=float)
    L = np.asarray(L, dtype=float)
    M = D.T @ Q @ D
    c = D.T @ (2 * Q @ shift + L)
    const = const + shift @ Q @ shift + L @ shift
    s, offset = binary_to_spin(M, c, const)
    return QuboProblem(s, offset, D, shift, source)


def qubo_from_linear_system(A, b, k: int) -> QuboProblem:
    """Minimise ``x^T (A^T A) x - 2 x^T A^T b`` over ``k``-bit fixed point in ``[-1, 1)``.

    Any exactly representable solution leaves a residual below
    ``t * sqrt(n) * 2^(1-k)`` for ``t = ||A||``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    if b.size != A.shape[0]:
        raise ValueError("b has the wrong length")
    n = A.shape[0]
    D = fixed_point_matrix(n, k)
    return _quadratic_to_qubo(A.T @ A, -2 * A.T @ b, 0.0, D, np.zeros(n))


@dataclass
class OdeEncoder:
    """``f2 y'' + f1 y' + f0 y = g`` on a uniform grid with fixed boundary values.

    Interior residuals use central differences; the objective is the sum of
    their squares.  Interior values are ``center + scale * x`` with ``x`` in
    ``k``-bit fixed point.
    """

    f2: np.ndarray
    f1: np.ndarray
    f0: np.ndarray
    g: np.ndarray
    y0: float
    y1: float
    k: int
    x0: float = 0.0
    x1: float = 1.0

    def __post_init__(self):
        arrs = [np.asarray(a, dtype=float) for a in (self.f2, self.f1, self.f0, self.g)]
        n_t = arrs[0].size
        if n_t < 4 or any(a.size != n_t for a in arrs):
            raise ValueError("coefficient arrays must share a grid of at least 4 points")
        if np.any(arrs[0][1:-1] == 0):
            raise ValueError("f2 vanishes on the grid")
        self.f2, self.f1, self.f0, self.g = arrs

    @property
    def n_t(self) -> int:
        return self.f2.size

    @property
    def h(self) -> float:
        return (self.x1 - self.x0) / (self.n_t - 1)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.n_t)

    def residual_map(self) -> tuple[np.ndarray, np.ndarray]:
        """``(C, e)`` with interior residuals ``C y_int + e``."""
        m = self.n_t - 2
        h = self.h
        C = np.zeros((m, m))
        e = -self.g[1:-1].copy()
        for r in range(m):
            i = r + 1
            lo = self.f2[i] / h**2 - self.f1[i] / (2 * h)
            mid = -2 * self.f2[i] / h**2 + self.f0[i]
            hi = self.f2[i] / h**2 + self.f1[i] / (2 * h)
            C[r, r] = mid
            if r > 0:
                C[r, r - 1] = lo
            else:
                e[r] += lo * self.y0
            if r < m - 1:
                C[r, r + 1] = hi
            else:
                e[r] += hi * self.y1
        return C, e

    def objective(self, y_int) -> np.ndarray:
        C, e = self.residual_map()
        r = np.asarray(y_int) @ C.T + e
        return (r**2).sum(axis=-1)

    def boundary_interpolant(self) -> np.ndarray:
        t = (self.grid[1:-1] - self.x0) / (self.x1 - self.x0)
        return self.y0 + (self.y1 - self.y0) * t

    def auto_scale(self) -> float:
        """A-priori window half-width around the boundary interpolant.

        For ``f2 y'' = g`` (no ``y'`` or ``y`` terms) the maximum principle gives
        ``|y - interpolant| <= L^2/8 * max|g/f2|``; otherwise 1.
        """
        if np.any(self.f1 != 0) or np.any(self.f0 != 0):
            return 1.0
        bound = (self.x1 - self.x0) ** 2 / 8 * np.abs(self.g / self.f2).max()
        return float(bound) if bound > 0 else 1.0

    def qubo(self, center=None, scale: float | None = None) -> QuboProblem:
        """Encoding ``y_int = center + scale * x``; defaults come from the boundary data."""
        m = self.n_t - 2
        if center is None:
            center = self.boundary_interpolant()
        center = np.broadcast_to(np.asarray(center, dtype=float), (m,)).copy()
        scale = self.auto_scale() if scale is None else float(scale)
        if scale <= 0:
            raise ValueError("scale must be positive")
        C, e = self.residual_map()
        D = fixed_point_matrix(m, self.k, scale)
        prob = _quadratic_to_qubo(C.T @ C, 2 * C.T @ e, e @ e, D, center, self)
        prob.scale = scale
        return prob

    def solve_exact(self) -> np.ndarray:
        C, e = self.residual_map()
        return np.linalg.solve(C, -e)


def qubo_from_ode(f2, f1, f0, g, n_t: int | None = None, y0: float = 0.0, y1: float = 0.0, k: int = 4,
                  x0: float = 0.0, x1: float = 1.0, center=None, scale: float | None = None) -> QuboProblem:
    """QUBO over ``(n_t - 2) * k`` bits for a two-point boundary-value problem.

    Coefficients may be arrays sampled on the grid or callables of ``x``.
    The encoding window defaults to :meth:`OdeEncoder.auto_scale` around the
    straight line through the boundary values.
    """
    if n_t is None:
        n_t = np.asarray(f2).size
    grid = np.linspace(x0, x1, n_t)
    vals = [np.asarray(f(grid) if callable(f) else np.broadcast_to(f, (n_t,)), dtype=float) for f in (f2, f1, f0, g)]
    return OdeEncoder(*vals, y0, y1, k, x0, x1).qubo(center, scale)


def refine(prev: QuboProblem, solution, scale: float | None = None) -> QuboProblem:
    """Re-centre an ODE encoding on ``solution`` with half (or the given) scale."""
    enc = prev.source
    if not isinstance(enc, OdeEncoder):
        raise ValueError("refine needs a problem built by qubo_from_ode")
    scale = getattr(prev, "scale", 1.0) / 2 if scale is None else scale
    return enc.qubo(np.asarray(solution, dtype=float), scale)


def brute_force(prob: QuboProblem, max_vars: int = 24):
    """All minimising spin assignments by enumeration: ``(energy, Z)``."""
    n = prob.n_vars
    if n > max_vars:
        raise ValueError(f"{n} variables exceed the enumeration limit of {max_vars}")
    idx = np.arange(2**n)
    bits = (idx[:, None] >> np.arange(n)) & 1
    z = 1 - 2 * bits
    energies = prob.energy(z)
    best = energies.min()
    return float(best), z[np.isclose(energies, best, rtol=0, atol=1e-9 * max(1.0, abs(best)))]


def maxcut_problem(n: int, edges, weights=None) -> QuboProblem:
    """Antiferromagnetic couplings: minimising ``sum w z_i z_j`` maximises the cut."""
    s = np.zeros((n, n))
    weights = [1.0] * len(edges) if weights is None else weights
    for (i, j), w in zip(edges, weights):
        if i == j:
            raise ValueError("self-loops are not allowed")
        s[i, j] += w
        s[j, i] += w
    return QuboProblem(s)


def random_maxcut(n: int, rng: np.random.Generator, p_edge: float = 0.5) -> QuboProblem:
    """Unit-weight Max-Cut on a G(n, p) graph with at least one edge."""
    while True:
        edges = [e for e in itertools.combinations(range(n), 2) if rng.random() < p_edge]
        if edges:
            return maxcut_problem(n, edges)
