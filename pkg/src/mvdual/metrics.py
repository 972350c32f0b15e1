"""Recovery metrics: ERR, MRSA and relative reconstruction error."""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

BRUTE_FORCE_MAX_R = 8


@dataclass(frozen=True)
class EvalReport:
    err: float
    mrsa: float
    rel_error: float
    best_permutation: tuple

    def to_dict(self):
        return {
            "err": self.err,
            "mrsa": self.mrsa,
            "rel_error": self.rel_error,
            "best_permutation": list(self.best_permutation),
        }


def _check_shapes(W_t, W):
    W_t = np.asarray(W_t, dtype=float)
    W = np.asarray(W, dtype=float)
    if W_t.ndim != 2 or W_t.shape != W.shape:
        raise ValueError(f"shape mismatch: {W_t.shape} vs {W.shape}")
    return W_t, W


def _best_matching(cost):
    """Permutation ``pi`` minimizing ``sum_k cost[k, pi[k]]``."""
    r = cost.shape[0]
    if r <= BRUTE_FORCE_MAX_R:
        best, best_perm = np.inf, None
        rows = np.arange(r)
        for perm in itertools.permutations(range(r)):
            total = cost[rows, perm].sum()
            if total < best:
                best, best_perm = total, perm
        return tuple(int(i) for i in best_perm)
    _, cols = linear_sum_assignment(cost)
    return tuple(int(i) for i in cols)


def err(W_t, W):
    """``min_pi ||W_t - W[:, pi]||_F / ||W_t||_F`` and the minimizing ``pi``."""
    W_t, W = _check_shapes(W_t, W)
    cost = np.sum((W_t[:, :, None] - W[:, None, :]) ** 2, axis=0)
    perm = _best_matching(cost)
    value = np.linalg.norm(W_t - W[:, list(perm)]) / np.linalg.norm(W_t)
    return float(value), perm


def mrsa(x, y):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    xc, yc = x - x.mean(), y - y.mean()
    nx, ny = np.linalg.norm(xc), np.linalg.norm(yc)
    if nx <= 1e-12 or ny <= 1e-12:
        raise ValueError("MRSA is undefined for constant vectors")
    cos = np.clip(xc @ yc / (nx * ny), -1.0, 1.0)
    return float(100.0 / np.pi * np.arccos(cos))


def mrsa_avg(W_t, W):
    W_t, W = _check_shapes(W_t, W)
    r = W_t.shape[1]
    cost = np.array([[mrsa(W_t[:, i], W[:, j]) for j in range(r)] for i in range(r)])
    perm = _best_matching(cost)
    return float(np.mean(cost[np.arange(r), list(perm)])), perm


def rel_error(X, W, H):
    X = np.asarray(X, dtype=float)
    nx = np.linalg.norm(X)
    if nx == 0:
        raise ValueError("X is identically zero")
    return float(np.linalg.norm(X - np.asarray(W) @ np.asarray(H)) / nx)


def evaluate(W_t, W, X=None, H=None):
    e, perm = err(W_t, W)
    m, _ = mrsa_avg(W_t, W)
    re = rel_error(X, W, H) if X is not None and H is not None else float("nan")
    return EvalReport(e, m, re, perm)
