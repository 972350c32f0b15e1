"""Block-coordinate ascent on the penalized dual-volume objective.

The objective over the dual vertex matrix ``dual`` ((r-1) x r) is::

    det(Z)^2 / s - lam * sum(max(0, Y^T dual - 1)^2),   Z = [dual; e^T]

where ``s`` is a positive volume scale. Each column of ``dual`` is updated
in turn by maximizing a linear minorizer of ``det(Z)^2 / s`` minus the slack
penalty, with the column constrained to ``dual_k = -dual_{-k} coef``,
``coef >= eps`` so the origin stays inside ``conv(dual)``.

With ``relative`` scaling, ``s`` is reset to ``det(Z)^2`` before every
column update. The minorizer's linear coefficient is then ``2 Z^{-1}[k, :]``,
independent of the size of the simplex, and ``lam`` weighs slack against
relative volume. A fixed ``s`` makes the objective unbounded for r >= 3
(``det^2`` grows like ``|dual|^(2(r-1))``, the penalty only quadratically).
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .polytope import DualSimplex, lift_ones

COEF_TOL = 1e-10
COEF_MAX_ITER = 500


@dataclass(frozen=True)
class MinorizerCoeffs:
    cofactors: np.ndarray
    twice_det: float


@dataclass
class BsumState:
    dual: np.ndarray
    lam: float
    epsilon: float = 0.01
    volume_scale: float = 1.0
    relative: bool = False
    objective: float = None
    steps: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        self.dual = np.array(self.dual, dtype=float)
        if self.lam <= 0:
            raise ValueError("lambda must be positive")

    @property
    def Z(self):
        return lift_ones(self.dual)

    @property
    def r(self):
        return self.dual.shape[1]


def slack(Y, dual):
    """Optimal slack ``max(0, Y^T dual - 1)`` (n x r)."""
    return np.maximum(Y.T @ dual - 1.0, 0.0)


def penalized_objective(dual, Y, lam, volume_scale=1.0):
    det = linalg.determinant(lift_ones(dual))
    D = slack(Y, dual)
    return det * det / volume_scale - lam * float(np.sum(D * D))


def _cofactor_column(Z, k):
    r = Z.shape[0]
    f = np.empty(r)
    for j in range(r):
        minor = np.delete(np.delete(Z, j, axis=0), k, axis=1)
        f[j] = (-1) ** (j + k) * linalg.determinant(minor)
    return f


def minorizer_coeffs(Z, k):
    """Cofactors of column ``k`` of ``Z`` and ``2 det(Z)``.

    Uses ``det(Z) * Z^{-1}[k, :]`` when ``Z`` is invertible, explicit minors
    otherwise.
    """
    Z = np.asarray(Z, dtype=float)
    det = linalg.determinant(Z)
    try:
        f = det * linalg.inverse(Z)[k, :]
    except linalg.SingularMatrixError:
        f = _cofactor_column(Z, k)
    return MinorizerCoeffs(f, 2.0 * det)


def _column_objective(coef, c, A, lam):
    s = np.maximum(A.T @ coef - 1.0, 0.0)
    return float(c @ coef - lam * (s @ s))


def _ray_maximizer(c, A, lam, coef, direction, t_cap=np.inf):
    """Exact maximizer over ``0 <= t <= t_cap`` of the column objective on a ray.

    The directional derivative is piecewise linear and nonincreasing in
    ``t`` with breakpoints where a hinge switches on or off; walk the
    breakpoints to the segment holding its root. Returns ``inf`` when the
    objective increases without bound.
    """
    s0 = A.T @ coef - 1.0
    u = A.T @ direction
    cd = c @ direction

    def slope(t):
        t = np.atleast_1d(t)
        on = np.maximum(s0[:, None] + u[:, None] * t[None, :], 0.0)
        return cd - 2.0 * lam * (u @ on)

    if slope(0.0)[0] <= 0:
        return 0.0
    nz = u != 0
    with np.errstate(divide="ignore"):
        bps = -s0[nz] / u[nz]
    bps = np.unique(bps[(bps > 0) & (bps < t_cap)])
    lo = 0.0
    if bps.size:
        sl = slope(bps)
        past = np.nonzero(sl <= 0)[0]
        if past.size:
            hi = bps[past[0]]
            lo = bps[past[0] - 1] if past[0] > 0 else 0.0
        else:
            lo, hi = bps[-1], t_cap
    else:
        hi = t_cap
    # linear slope a - b t on (lo, hi): hinges on just past lo stay on
    probe = lo + (min(hi, lo + 1.0) - lo) * 0.5 if np.isfinite(hi) else lo + 1.0
    on = s0 + probe * u > 0
    a = cd - 2.0 * lam * (s0[on] @ u[on])
    b = 2.0 * lam * (u[on] @ u[on])
    if b <= 0:
        return hi if np.isfinite(hi) else np.inf
    return float(np.clip(a / b, lo, hi))


def _newton_direction(A, lam, act, free, pg):
    Af = A[np.ix_(free, act)]
    H = 2.0 * lam * (Af @ Af.T)
    tr = np.trace(H)
    mu = 1e-12 * tr / H.shape[0] if tr > 0 else 1.0
    direction = np.zeros(pg.size)
    try:
        direction[free] = np.linalg.solve(H + mu * np.eye(H.shape[0]), pg[free])
    except np.linalg.LinAlgError:
        direction[free] = pg[free]
    return direction


def solve_coef(c, A, lam, eps, coef0, tol=COEF_TOL, max_iter=COEF_MAX_ITER):
    """Maximize ``c^T b - lam * sum(max(0, A^T b - 1)^2)`` over ``b >= eps``.

    Semismooth Newton: the curvature of the active hinges, regularized so
    it stays invertible, gives a direction on the coordinates not held at
    the bound; an exact line search along it (capped where a coordinate
    reaches ``eps``) keeps every step an ascent step. The objective is
    concave and piecewise quadratic, so once the hinge pattern settles the
    Newton step is exact. Returns ``(coef, converged)``; ``coef`` is all
    ``inf`` if the objective is unbounded.
    """
    d = c.size
    coef = np.maximum(np.asarray(coef0, dtype=float), eps)
    gscale = max(np.linalg.norm(c), 1e-300)
    val = _column_objective(coef, c, A, lam)
    for _ in range(max_iter):
        s = A.T @ coef - 1.0
        act = s > 0
        grad = c - 2.0 * lam * (A[:, act] @ s[act])
        fixed = (coef <= eps) & (grad <= 0)
        pg = np.where(fixed, 0.0, grad)
        if np.linalg.norm(pg) <= tol * gscale:
            return coef, True
        direction = None
        for _ in range(d):
            # pin bound coordinates the Newton step would push below eps
            free = ~fixed
            if np.linalg.norm(pg[free]) <= tol * gscale:
                break
            trial = _newton_direction(A, lam, act, free, pg)
            blocked = free & (coef <= eps) & (trial < 0)
            if not blocked.any():
                direction = trial
                break
            fixed = fixed | blocked
        if direction is None:
            direction = pg
        neg = direction < 0
        t_cap = np.min((coef[neg] - eps) / -direction[neg]) if neg.any() else np.inf
        t = _ray_maximizer(c, A, lam, coef, direction, max(t_cap, 0.0))
        if not np.isfinite(t):
            return np.full(d, np.inf), False
        cand = np.maximum(coef + t * direction, eps)
        if neg.any() and t >= t_cap:
            cand[neg & (coef + t * direction <= eps * (1 + 1e-12))] = eps
        cval = _column_objective(cand, c, A, lam)
        if cval <= val and not (neg.any() and t >= t_cap):
            # no representable ascent left
            return coef, bool(np.linalg.norm(pg) <= 1e-6 * gscale)
        if cval >= val:
            coef, val = cand, cval
        else:
            return coef, False
    return coef, False


def _column_problem(dual, k, Y, volume_scale):
    Z = lift_ones(dual)
    coeffs = minorizer_coeffs(Z, k)
    weight = coeffs.twice_det / volume_scale
    lin = weight * coeffs.cofactors[:-1]
    M = np.delete(dual, k, axis=1)
    try:
        coef0 = linalg.solve(M, -dual[:, k])
    except linalg.SingularMatrixError:
        coef0 = np.ones(M.shape[1])
    return lin, weight * coeffs.cofactors[-1], M, coef0


def solve_column(Y, dual, k, lam, epsilon=0.01, volume_scale=1.0):
    """Solve one column subproblem without touching ``dual``.

    Returns ``(coef, value)`` where ``value`` is the minorizer objective
    ``2 det(Z) f^T [dual_k; 1] / s - lam * ||slack||^2`` at the new column.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    dual = np.asarray(dual, dtype=float)
    lin, const, M, coef0 = _column_problem(dual, k, Y, volume_scale)
    coef, _ = solve_coef(-M.T @ lin, -M.T @ Y, lam, epsilon, coef0)
    col = -M @ coef
    s = np.maximum(Y.T @ col - 1.0, 0.0)
    return coef, float(lin @ col + const - lam * (s @ s))


def update_column(state, k, Y):
    """Replace column ``k`` of ``state.dual`` by the minorizer maximizer.

    The update is kept only if it does not lower the minorizer below its
    value at the current column, which makes the penalized objective
    monotone even when the current column lies outside the cone spanned by the other columns.
    Appends ``(before, after)`` objective values to ``state.steps``.
    """
    dual = state.dual
    lam, eps = state.lam, state.epsilon
    if state.relative:
        det = linalg.determinant(lift_ones(dual))
        if det != 0:
            state.volume_scale = det * det
    before = penalized_objective(dual, Y, lam, state.volume_scale)
    lin, _, M, coef0 = _column_problem(dual, k, Y, state.volume_scale)
    coef, converged = solve_coef(-M.T @ lin, -M.T @ Y, lam, eps, coef0)
    if not np.all(np.isfinite(coef)):
        state.warnings.append(f"column {k}: unbounded subproblem, column kept")
        coef = None
    elif not converged:
        state.warnings.append(f"column {k}: inner solver hit its iteration cap")

    def surrogate(col):
        s = np.maximum(Y.T @ col - 1.0, 0.0)
        return float(lin @ col - lam * (s @ s))

    if coef is not None:
        new_col = -M @ coef
        if surrogate(new_col) >= surrogate(dual[:, k]):
            dual = dual.copy()
            dual[:, k] = new_col
            state.dual = dual
    state.objective = penalized_objective(state.dual, Y, lam, state.volume_scale)
    state.steps.append((before, state.objective))
    return state


def bsum_sweep(state, Y):
    for k in range(state.r):
        update_column(state, k, Y)
    return state


def inner_solve(dual0, Y, lam, epsilon=0.01, rel_tol=1e-3, max_iters=100,
                volume_scale=1.0, relative=False):
    """Sweep until the relative change of ``Z`` is at most ``rel_tol``.

    Returns a :class:`DualSimplex`; its ``info`` dict holds the number of
    sweeps, the per-update ``(before, after)`` objective pairs grouped by
    sweep, the last volume scale and any warnings.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    state = BsumState(dual0, lam, epsilon, volume_scale, relative)
    traces = []
    sweeps = 0
    while sweeps < max_iters:
        Z_prev = state.Z
        state.steps = []
        bsum_sweep(state, Y)
        traces.append(state.steps)
        sweeps += 1
        change = np.linalg.norm(state.Z - Z_prev) / np.linalg.norm(Z_prev)
        if change <= rel_tol:
            break
    info = {
        "sweeps": sweeps,
        "objectives": traces,
        "volume_scale": state.volume_scale,
        "warnings": list(state.warnings),
    }
    return DualSimplex(state.dual, info=info)
