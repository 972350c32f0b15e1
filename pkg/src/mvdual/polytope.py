"""Polar-duality geometry for simplices in R^(r-1).

A simplex is stored as an (r-1) x r matrix whose columns are its vertices.
For a simplex containing the origin in its interior, its polar is again a
simplex; column k of the polar is the normal of the facet opposite vertex k,
scaled so the facet is ``{x : dual_k^T x = 1}``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg

INTERIOR_TOL = 1e-10


class OriginNotInteriorError(ValueError):
    pass


class DegenerateSimplexError(ValueError):
    pass


@dataclass(frozen=True)
class BarycentricCoords:
    weights: np.ndarray
    interior: bool


@dataclass
class DualSimplex:
    dual: np.ndarray
    volume: float = field(default=None)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.dual = np.asarray(self.dual, dtype=float)
        if self.volume is None:
            self.volume = simplex_volume(self.dual)

    @property
    def lifted(self):
        return lift_ones(self.dual)


def lift_ones(dual):
    """Append a row of ones: ``[dual; e^T]``."""
    dual = np.atleast_2d(np.asarray(dual, dtype=float))
    return np.vstack([dual, np.ones((1, dual.shape[1]))])


def simplex_volume(dual):
    dual = np.atleast_2d(np.asarray(dual, dtype=float))
    d, r = dual.shape
    if r != d + 1 or r < 2:
        raise ValueError(f"simplex matrix must be (r-1) x r with r >= 2, got {dual.shape}")
    return abs(linalg.determinant(lift_ones(dual))) / math.factorial(r - 1)


def barycentric_of_origin(vertices):
    """Weights ``q`` with ``P q = 0`` and ``e^T q = 1``."""
    P = np.atleast_2d(np.asarray(vertices, dtype=float))
    r = P.shape[1]
    rhs = np.zeros(r)
    rhs[-1] = 1.0
    try:
        q = linalg.solve(lift_ones(P), rhs)
    except linalg.SingularMatrixError as exc:
        raise DegenerateSimplexError("vertices are affinely dependent") from exc
    return BarycentricCoords(q, bool(np.all(q > INTERIOR_TOL)))


def polar_vertices(dual):
    """Vertices of the polar of ``conv(dual)``, in matching column order.

    Column k of the result solves ``dual_j^T x = 1`` for all ``j != k``.
    """
    dual = np.atleast_2d(np.asarray(dual, dtype=float))
    d, r = dual.shape
    bary = barycentric_of_origin(dual)
    if not bary.interior:
        raise OriginNotInteriorError(
            f"origin is not interior to the simplex (barycentric weights {bary.weights})"
        )
    out = np.empty_like(dual)
    ones = np.ones(d)
    for k in range(r):
        normals = np.delete(dual, k, axis=1)
        try:
            out[:, k] = linalg.solve(normals.T, ones)
        except linalg.SingularMatrixError as exc:
            raise DegenerateSimplexError(f"facet normals for vertex {k} are dependent") from exc
    return out


def translate_polar(dual, w):
    """Polar matrix after translating the primal simplex by ``-w``."""
    dual = np.atleast_2d(np.asarray(dual, dtype=float))
    w = np.asarray(w, dtype=float).reshape(-1)
    scale = 1.0 - dual.T @ w
    bad = np.nonzero(scale <= 0)[0]
    if bad.size:
        raise OriginNotInteriorError(
            f"translation leaves the primal polytope: 1 - dual_{bad[0]}^T w = {scale[bad[0]]:.3e}"
        )
    return dual / scale


def volume_transform_factor(dual, N, w):
    """Factor ``c`` with ``vol(conv(dual N)) = c * vol(conv(dual))``.

    Requires ``dual w = 0`` and ``e^T w != 0``.
    """
    dual = np.atleast_2d(np.asarray(dual, dtype=float))
    w = np.asarray(w, dtype=float).reshape(-1)
    ew = w.sum()
    if ew == 0:
        raise ValueError("e^T w must be nonzero")
    if np.linalg.norm(dual @ w) > 1e-8 * max(1.0, np.linalg.norm(dual) * np.linalg.norm(w)):
        raise ValueError("w must lie in the null space of dual")
    Ninv_w = linalg.solve(N, w)
    return abs(linalg.determinant(N)) * abs(Ninv_w.sum() / ew)


def max_polar_violation(Y, dual):
    """``max(Y^T dual - 1)``; nonpositive iff ``conv(dual)`` lies in ``conv(Y)*``."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    dual = np.atleast_2d(np.asarray(dual, dtype=float))
    return float(np.max(Y.T @ dual) - 1.0)
