"""Brute-force reference solvers for tests; deliberately slow and independent.

Nothing here calls the production geometry or subproblem code. Volumes,
cofactors and vertices are recomputed from scratch with explicit minors and
subset enumeration; only :mod:`mvdual.linalg` is shared.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import linalg

MAX_GRID_POINTS = 10**8
MAX_ORACLE_R = 4
MAX_ORACLE_N = 12
FEAS_TOL = 1e-9
_CHUNK = 1 << 18


class OracleLimitError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    lower: tuple
    upper: tuple
    step: float

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lower and upper must be vectors of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("grid bounds must be finite")
        if np.any(hi < lo):
            raise ValueError("upper bound below lower bound")
        if not self.step > 0:
            raise ValueError("step must be positive")

    def axes(self):
        return [
            np.arange(lo, hi + 0.5 * self.step, self.step)
            for lo, hi in zip(self.lower, self.upper)
        ]

    @property
    def size(self):
        return math.prod(a.size for a in self.axes())


@dataclass(frozen=True)
class PolarVertexSet:
    vertices: np.ndarray
    degenerate: bool


def _cofactors(Z, k):
    r = Z.shape[0]
    rows = np.arange(r)
    out = np.empty(r)
    for j in range(r):
        minor = Z[np.ix_(rows != j, np.arange(r) != k)]
        out[j] = (-1) ** (j + k) * linalg.determinant(minor)
    return out


def column_qp_objective(Y, Z, k, lam, coef, volume_scale=1.0):
    """Minorizer objective of column ``k`` at ``dual_k = -dual_{-k} coef``.

    ``2 det(Z) f^T t / s - lam * ||max(0, Y^T dual_k - 1)||^2`` with ``f`` the
    cofactors of column ``k`` and ``t = [dual_k; 1]``. ``coef`` may hold
    several candidates as columns.
    """
    Z = np.asarray(Z, dtype=float)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    f = _cofactors(Z, k)
    weight = 2.0 * linalg.determinant(Z) / volume_scale
    others = np.delete(Z[:-1], k, axis=1)
    coef = np.asarray(coef, dtype=float)
    flat = coef.ndim == 1
    B = coef.reshape(-1, 1) if flat else coef
    cols = -others @ B
    s = np.maximum(Y.T @ cols - 1.0, 0.0)
    val = weight * (f[:-1] @ cols + f[-1]) - lam * np.sum(s * s, axis=0)
    return float(val[0]) if flat else val


def grid_qp_oracle(Y, Z, k, lam, epsilon, grid, volume_scale=1.0):
    """Exhaustive grid maximization of the column subproblem over ``coef``.

    Grid points below ``epsilon`` are discarded. Returns ``(coef, value)``.
    """
    Z = np.asarray(Z, dtype=float)
    d = Z.shape[0] - 1
    if d > 3:
        raise OracleLimitError("grid oracle supports r - 1 <= 3 only")
    if len(grid.lower) != d:
        raise ValueError(f"grid has {len(grid.lower)} axes, subproblem has {d}")
    if grid.size > MAX_GRID_POINTS:
        raise OracleLimitError(f"grid has {grid.size} points (cap {MAX_GRID_POINTS})")
    axes = [a[a >= epsilon] for a in grid.axes()]
    if any(a.size == 0 for a in axes):
        raise ValueError("grid lies entirely below epsilon")
    best_val, best_coef = -np.inf, None
    shape = tuple(a.size for a in axes)
    total = math.prod(shape)
    for start in range(0, total, _CHUNK):
        idx = np.unravel_index(np.arange(start, min(start + _CHUNK, total)), shape)
        B = np.vstack([axes[j][idx[j]] for j in range(d)])
        vals = column_qp_objective(Y, Z, k, lam, B, volume_scale)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best_coef = float(vals[i]), B[:, i].copy()
    return best_coef, best_val


def _halfspace_vertices(normals, tol=FEAS_TOL):
    """Vertices of ``{x : a_i^T x <= 1}`` for the columns ``a_i`` of ``normals``."""
    d, n = normals.shape
    found = []
    for subset in itertools.combinations(range(n), d):
        A = normals[:, subset].T
        try:
            x = linalg.solve(A, np.ones(d))
        except linalg.SingularMatrixError:
            continue
        if np.all(normals.T @ x <= 1.0 + tol * max(1.0, np.abs(x).max())):
            if not any(np.allclose(x, y, rtol=1e-9, atol=1e-12) for y in found):
                found.append(x)
    if not found:
        return np.empty((d, 0))
    return np.column_stack(found)


def polar_oracle(dual):
    """Polar of ``conv(dual)`` by enumerating every (r-1)-subset of facets."""
    dual = np.atleast_2d(np.asarray(dual, dtype=float))
    d, r = dual.shape
    if r > MAX_ORACLE_R or r != d + 1:
        raise OracleLimitError(f"polar oracle needs an (r-1) x r matrix with r <= {MAX_ORACLE_R}")
    V = _halfspace_vertices(dual)
    return PolarVertexSet(V, V.shape[1] < r)


def _volume(P):
    d, r = P.shape
    Z = np.vstack([P, np.ones((1, r))])
    return abs(linalg.determinant(Z)) / math.factorial(d)


def max_volume_vertex_oracle(Y, r):
    """Largest simplex with vertices among the vertices of ``{t : Y^T t <= 1}``.

    Returns ``(dual, volume)``.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    d, n = Y.shape
    if d != r - 1:
        raise ValueError(f"Y has {d} rows, expected r - 1 = {r - 1}")
    if r > MAX_ORACLE_R or n > MAX_ORACLE_N:
        raise OracleLimitError(f"oracle caps are r <= {MAX_ORACLE_R}, n <= {MAX_ORACLE_N}")
    V = _halfspace_vertices(Y)
    if V.shape[1] < r:
        raise ValueError("polar polytope has fewer than r vertices (is it bounded?)")
    best_vol, best = -1.0, None
    for subset in itertools.combinations(range(V.shape[1]), r):
        vol = _volume(V[:, subset])
        if vol > best_vol:
            best_vol, best = vol, V[:, subset]
    return best.copy(), best_vol
