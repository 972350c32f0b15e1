"""Simplex-constrained least squares and SNPA."""

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix

log = logging.getLogger(__name__)


class RankWarning(UserWarning):
    pass


@dataclass(frozen=True)
class IndexSet:
    indices: tuple

    def __post_init__(self):
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("indices must be distinct")

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)


def project_simplex(V):
    """Euclidean projection of each column of ``V`` onto the unit simplex."""
    V = np.asarray(V, dtype=float)
    squeeze = V.ndim == 1
    if squeeze:
        V = V[:, None]
    r = V.shape[0]
    U = -np.sort(-V, axis=0)
    css = np.cumsum(U, axis=0) - 1.0
    ind = np.arange(1, r + 1)[:, None]
    cond = U - css / ind > 0
    rho = r - 1 - np.argmax(cond[::-1], axis=0)
    tau = css[rho, np.arange(V.shape[1])] / (rho + 1)
    out = np.maximum(V - tau, 0.0)
    return out[:, 0] if squeeze else out


def simplex_nnls(W, X, tol=1e-8, max_iter=1000, H0=None):
    """Columnwise ``min ||X(:,j) - W h||`` over the unit simplex.

    Accelerated projected gradient with adaptive restart; stops once the
    scaled gradient-mapping norm of every column is below ``tol``.
    """
    W = as_matrix(W, "W")
    X = as_matrix(X, "X")
    if W.shape[0] != X.shape[0]:
        raise ValueError(f"W has {W.shape[0]} rows but X has {X.shape[0]}")
    r, n = W.shape[1], X.shape[1]
    if r == 1:
        return np.ones((1, n))
    WtW = W.T @ W
    WtX = W.T @ X
    L = np.linalg.eigvalsh(WtW)[-1]
    if L <= 0:
        return np.full((r, n), 1.0 / r)
    step = 1.0 / L
    H = project_simplex(H0) if H0 is not None else np.full((r, n), 1.0 / r)
    Zk = H.copy()
    t = np.ones(n)
    scale = max(np.abs(WtX).max(), L)
    for _ in range(max_iter):
        G = WtW @ Zk - WtX
        H_new = project_simplex(Zk - step * G)
        # gradient restart keeps the momentum from overshooting
        restart = np.sum((Zk - H_new) * (H_new - H), axis=0) > 0
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        Zk = H_new + ((t - 1.0) / t_new) * (H_new - H)
        Zk[:, restart] = H_new[:, restart]
        t = np.where(restart, 1.0, t_new)
        H = H_new
        Gh = WtW @ H - WtX
        gm = L * np.abs(H - project_simplex(H - step * Gh)).max()
        if gm <= tol * scale:
            break
    return _polish_support(W, X, H)


def _polish_support(W, X, H):
    # exact equality-constrained LS on each detected support; kept only when feasible and better
    r = W.shape[1]
    support = H > 1e-12 * np.maximum(H.max(axis=0), 1e-300)
    patterns, inverse = np.unique(support.T, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    H = H.copy()
    for p_idx, pat in enumerate(patterns):
        cols = np.nonzero(inverse == p_idx)[0]
        S = np.nonzero(pat)[0]
        k = S.size
        Ws = W[:, S]
        K = np.zeros((k + 1, k + 1))
        K[:k, :k] = Ws.T @ Ws
        K[:k, k] = 1.0
        K[k, :k] = 1.0
        rhs = np.vstack([Ws.T @ X[:, cols], np.ones((1, cols.size))])
        try:
            sol = np.linalg.solve(K, rhs)[:k]
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(sol)):
            continue
        cand = np.zeros((r, cols.size))
        cand[S] = sol
        ok = np.all(cand >= 0, axis=0)
        old = np.sum((X[:, cols] - W @ H[:, cols]) ** 2, axis=0)
        new = np.sum((X[:, cols] - W @ cand) ** 2, axis=0)
        ok &= new <= old
        H[:, cols[ok]] = cand[:, ok]
    return H


def snpa(X, r):
    """Successive nonnegative projection: greedily pick ``r`` extreme columns.

    The residual at each step is ``X`` minus its projection onto the convex
    hull of the origin and the columns selected so far.
    """
    X = as_matrix(X, "X")
    n = X.shape[1]
    if not 1 <= r <= n:
        raise ValueError(f"need 1 <= r <= n, got r={r}, n={n}")
    norm0 = np.sum(X * X, axis=0)
    if norm0.max() == 0:
        raise ValueError("X is identically zero")
    R = X.copy()
    picked = []
    for _ in range(r):
        res = np.sum(R * R, axis=0)
        res[picked] = -1.0
        j = int(np.argmax(res))
        if res[j] <= 1e-18 * norm0.max():
            warnings.warn(
                f"SNPA residual vanished after {len(picked)} of {r} picks", RankWarning
            )
            break
        picked.append(j)
        Wk = np.hstack([X[:, picked], np.zeros((X.shape[0], 1))])
        Hk = simplex_nnls(Wk, X)
        R = X - Wk @ Hk
    return IndexSet(tuple(picked))
