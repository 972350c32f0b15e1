"""MV-Dual: maximum-volume dual simplex factorization ``X ~ W H``.

Outer loop: reduce the data around a translation vector ``v``, refine a
pool of random dual simplices by block-coordinate ascent, keep the one with
the largest volume, map its polar back to the data space and re-center at
the mean of the recovered vertices. Stops when ``v`` moves by less than
``outer_rel_tol`` relative to its previous value.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import baselines, polytope, preprocess
from .subproblem import inner_solve

log = logging.getLogger(__name__)

DEGENERATE_VOLUME = 1e-12
TIE_RTOL = 1e-9


class SolverFailure(RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass
class SolverConfig:
    lam: float = 100.0
    n_init: int = 5
    init_mode: str = "mean"
    outer_rel_tol: float = 0.01
    outer_max_iters: int = 50
    inner_rel_tol: float = 1e-3
    inner_max_iters: int = 100
    epsilon: float = 0.01
    base_seed: int = 0
    feasible_start: bool = True
    volume_scale: str = "relative"
    n_jobs: int = 1

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.n_init < 1:
            raise ValueError("n_init must be at least 1")
        for name in ("outer_rel_tol", "inner_rel_tol", "epsilon"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.init_mode not in ("mean", "snpa"):
            raise ValueError(f"unknown init mode {self.init_mode!r}")
        if self.volume_scale not in ("relative", "data", "none"):
            raise ValueError(f"unknown volume scale {self.volume_scale!r}")

    def to_dict(self):
        return asdict(self)


@dataclass
class FactorizationResult:
    W: np.ndarray
    H: np.ndarray
    v_trace: list
    volume_trace: list
    outer_iters: int
    winning_candidate: int
    candidate_volumes: list = field(default_factory=list)
    objective_traces: list = field(default_factory=list)
    inner_sweeps: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def monotone(self, tol=1e-9):
        """True when no column update lowered the penalized objective."""
        return all(objective_nondecreasing(sweep, tol) for sweep in self.objective_traces)


def objective_nondecreasing(steps, tol=1e-9):
    """Check ``(before, after)`` pairs: ``after >= before - tol * max(1, |before|)``."""
    for before, after in steps:
        if after < before - tol * max(1.0, abs(before)):
            return False
    return True


def data_volume_scale(Y):
    """Squared determinant scale of a dual simplex for data of this spread.

    Dual vertices scale like the inverse of the data radius, so ``det(Z)^2``
    scales like ``radius^(-2(r-1))``; dividing by this keeps ``lam``
    comparable across datasets of different magnitude.
    """
    d = Y.shape[0]
    radius = math.sqrt(float(np.mean(np.sum(Y * Y, axis=0))))
    if radius == 0:
        return 1.0
    return radius ** (-2 * d)


def _volume_scale(Y, config):
    return 1.0 if config.volume_scale == "none" else data_volume_scale(Y)


def initial_candidate(Y, r, seed, feasible=True):
    """Standard-normal dual simplex centred so the origin is its centroid."""
    rng = np.random.default_rng(seed)
    dual = rng.standard_normal((r - 1, r))
    dual -= dual.mean(axis=1, keepdims=True)
    if feasible:
        viol = polytope.max_polar_violation(Y, dual)
        dual /= max(1.0, 1.0 + viol)
    return dual


def _select_winner(volumes):
    best = 0
    for i, vol in enumerate(volumes):
        if vol > volumes[best] * (1.0 + TIE_RTOL):
            best = i
    return best


def _map(fn, items, n_jobs):
    if n_jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def run_reduced(Y, config, duals0=None):
    """Multi-start refinement on reduced data; returns the largest-volume candidate.

    ``duals0`` optionally warm-starts candidates (``None`` entries are drawn
    fresh). Returns ``(winner, diagnostics)``.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    d, n = Y.shape
    r = d + 1
    if not np.all(np.isfinite(Y)):
        raise ValueError("Y contains non-finite entries")
    sv = np.linalg.svd(Y, compute_uv=False)
    if n < r or sv[0] == 0 or sv[-1] <= 1e-10 * sv[0]:
        raise SolverFailure(
            "reduced data do not span R^(r-1)", {"singular_values": sv.tolist(), "n": n}
        )
    scale = _volume_scale(Y, config)
    starts = []
    for i in range(config.n_init):
        t0 = None if duals0 is None else duals0[i]
        if t0 is None:
            t0 = initial_candidate(Y, r, config.base_seed + i, config.feasible_start)
        starts.append(t0)

    def refine(dual0):
        return inner_solve(
            dual0, Y, config.lam, config.epsilon,
            config.inner_rel_tol, config.inner_max_iters, scale,
            relative=config.volume_scale == "relative",
        )

    candidates = _map(refine, starts, config.n_jobs)
    volumes = [c.volume for c in candidates]
    best = _select_winner(volumes)
    diag = {
        "candidate_volumes": volumes,
        "winner": best,
        "candidates": candidates,
        "volume_scale": scale,
    }
    if volumes[best] < DEGENERATE_VOLUME:
        raise SolverFailure("every candidate dual simplex is degenerate", diag)
    return candidates[best], diag


def origin_interior_to_hull(Y, tol=1e-12):
    """Whether the origin lies strictly inside ``conv(Y)`` (Y is d x n)."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[0] == 1:
        return Y.min() < -tol and Y.max() > tol
    from scipy.spatial import ConvexHull, QhullError

    try:
        hull = ConvexHull(Y.T)
    except QhullError:
        return False
    # facet equations a^T x + b <= 0 inside; origin gives b
    return bool(np.all(hull.equations[:, -1] < -tol))


def dual_volume_value(Y, w, config):
    """Largest dual volume found after translating the data by ``-w``.

    Returns ``inf`` when ``w`` is not strictly inside ``conv(Y)`` (the
    feasible dual region is then unbounded).
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    w = np.asarray(w, dtype=float).reshape(-1, 1)
    Yw = Y - w
    if not origin_interior_to_hull(Yw):
        return math.inf
    winner, _ = run_reduced(Yw, config)
    return winner.volume


def _relative_change(new, old):
    denom = np.linalg.norm(old)
    diff = np.linalg.norm(new - old)
    return diff / denom if denom > 0 else diff


def factorize(X, r, config=None):
    config = config or SolverConfig()
    X = np.asarray(X, dtype=float)
    v = preprocess.initial_translation(X, config.init_mode, r)
    problem = preprocess.center_and_reduce(X, v, r)
    v_trace = [v.copy()]
    volume_trace = []
    objective_traces = []
    inner_sweeps = []
    warnings = []
    duals = None
    W = None
    best = 0
    candidate_volumes = []
    p = 0
    for p in range(1, config.outer_max_iters + 1):
        winner, diag = run_reduced(problem.Y, config, duals)
        best = diag["winner"]
        candidate_volumes.append(diag["candidate_volumes"])
        for cand in diag["candidates"]:
            objective_traces.extend(cand.info["objectives"])
            inner_sweeps.append(cand.info["sweeps"])
            warnings.extend(cand.info["warnings"])
        volume_trace.append(winner.volume)
        W_hat = polytope.polar_vertices(winner.dual)
        W = preprocess.lift(W_hat, problem)
        v_new = W.mean(axis=1)
        v_trace.append(v_new)
        change = _relative_change(v_new, problem.v)
        log.debug("outer %d: volume %.6g, v change %.3g", p, winner.volume, change)
        if change <= config.outer_rel_tol:
            break
        # warm start: the polar of a translated simplex is a column rescaling
        shift = problem.U.T @ (v_new - problem.v)
        duals = []
        for cand in diag["candidates"]:
            try:
                duals.append(polytope.translate_polar(cand.dual, shift))
            except polytope.OriginNotInteriorError:
                duals.append(None)
        problem = preprocess.retranslate(problem, X, v_new)
    else:
        warnings.append(f"outer loop stopped at the cap of {config.outer_max_iters} iterations")
    H = baselines.simplex_nnls(W, X)
    return FactorizationResult(
        W=W,
        H=H,
        v_trace=v_trace,
        volume_trace=volume_trace,
        outer_iters=p,
        winning_candidate=best,
        candidate_volumes=candidate_volumes,
        objective_traces=objective_traces,
        inner_sweeps=inner_sweeps,
        warnings=warnings,
    )


def default_threads():
    try:
        return max(1, int(os.environ.get("MVDUAL_THREADS", "1")))
    except ValueError:
        return 1
