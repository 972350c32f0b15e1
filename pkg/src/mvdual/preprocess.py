"""Translation and dimensionality reduction of the data matrix.

``X`` (m x n) is centered at a translation vector ``v`` and projected on the
top ``r-1`` left singular vectors of ``X - v e^T``, giving an equivalent
full-dimensional problem ``Y`` in R^(r-1).
"""

from dataclasses import dataclass

import numpy as np

from . import linalg

RANK_TOL = 1e-10


class RankDeficiencyError(ValueError):
    """The affine hull of the data has dimension below r-1."""


@dataclass(frozen=True)
class ReducedProblem:
    Y: np.ndarray
    U: np.ndarray
    v: np.ndarray
    r: int


def center_and_reduce(X, v, r):
    X = linalg.as_matrix(X, "X")
    m, n = X.shape
    if r < 2 or n < r:
        raise ValueError(f"need n >= r >= 2, got r={r}, n={n}")
    if m < r - 1:
        raise ValueError(f"need m >= r-1, got m={m}, r={r}")
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (m,):
        raise ValueError(f"translation vector must have length {m}")
    Xc = X - v[:, None]
    s = np.linalg.svd(Xc, compute_uv=False)
    if s[0] == 0 or s[r - 2] <= RANK_TOL * s[0]:
        raise RankDeficiencyError(
            f"affine hull of the data has dimension below r-1={r - 1} "
            f"(singular values {s[:r]})"
        )
    svd = linalg.truncated_svd(Xc, r - 1)
    U = svd.left_basis
    return ReducedProblem(U.T @ Xc, U, v, r)


def retranslate(problem, X, v):
    """Same projection basis, new translation vector."""
    v = np.asarray(v, dtype=float).reshape(-1)
    Y = problem.U.T @ (np.asarray(X, dtype=float) - v[:, None])
    return ReducedProblem(Y, problem.U, v, problem.r)


def lift(W_reduced, problem):
    """``W = U W_reduced + v e^T``."""
    W_reduced = np.atleast_2d(np.asarray(W_reduced, dtype=float))
    return problem.U @ W_reduced + problem.v[:, None]


def initial_translation(X, mode, r):
    X = linalg.as_matrix(X, "X")
    if mode == "mean":
        return X.mean(axis=1)
    if mode == "snpa":
        from .baselines import snpa

        K = list(snpa(X, r))
        return X[:, K].mean(axis=1)
    raise ValueError(f"unknown init mode {mode!r}")
