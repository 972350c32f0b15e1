"""Synthetic SSMF benchmark instances.

Columns of H are drawn from symmetric Dirichlet distributions, either on one
facet of the unit simplex (one coordinate pinned at zero) or in its interior,
and rejected while any entry exceeds the purity level.
"""

from dataclasses import dataclass, field

import numpy as np

MAX_RESAMPLE = 100_000


class InfeasiblePurityError(RuntimeError):
    pass


@dataclass(frozen=True)
class SyntheticSpec:
    r: int
    m: int
    n1: int
    n2: int
    purity: float = 1.0
    snr: float = None
    seed: int = 0
    include_vertices: bool = False

    def __post_init__(self):
        if self.r < 3:
            raise ValueError("r must be at least 3 (purity range is (1/(r-1), 1])")
        if self.m < self.r - 1:
            raise ValueError("m must be at least r-1")
        if self.n1 < 0 or self.n2 < 0 or self.n1 % self.r:
            raise ValueError("n1 must be a nonnegative multiple of r and n2 >= 0")
        if not 1.0 / (self.r - 1) < self.purity <= 1.0:
            raise ValueError(f"purity must lie in (1/(r-1), 1], got {self.purity}")
        if self.include_vertices and self.purity < 1.0:
            raise ValueError("including the vertices requires purity 1")
        if self.snr is not None and not np.isfinite(self.snr):
            raise ValueError("snr must be finite or None")


@dataclass
class SyntheticInstance:
    spec: SyntheticSpec
    W_t: np.ndarray
    H_t: np.ndarray
    X_clean: np.ndarray
    X_noisy: np.ndarray = None
    achieved_purity: float = field(default=None)

    @property
    def X(self):
        return self.X_clean if self.X_noisy is None else self.X_noisy


def _dirichlet(rng, d, size):
    g = rng.gamma(1.0 / d, 1.0, size=(d, size))
    s = g.sum(axis=0)
    # all-underflow draws are redrawn by the caller's purity loop
    with np.errstate(invalid="ignore", divide="ignore"):
        return g / s


def _draw_columns(rng, r, count, purity, facet=None):
    d = r - 1 if facet is not None else r
    out = np.empty((r, count))
    todo = np.arange(count)
    attempts = 0
    while todo.size:
        attempts += 1
        if attempts > MAX_RESAMPLE:
            raise InfeasiblePurityError(
                f"could not draw columns with entries <= {purity} after {MAX_RESAMPLE} attempts"
            )
        draw = _dirichlet(rng, d, todo.size)
        if facet is not None:
            draw = np.insert(draw, facet, 0.0, axis=0)
        ok = np.all(np.isfinite(draw), axis=0) & (draw.max(axis=0) <= purity)
        out[:, todo[ok]] = draw[:, ok]
        todo = todo[~ok]
    return out


def purity_of(H):
    H = np.asarray(H, dtype=float)
    if np.any(H < -1e-12) or np.any(np.abs(H.sum(axis=0) - 1.0) > 1e-8):
        raise ValueError("H must be column stochastic")
    return float(H.max(axis=1).min())


def noise_variance(X, snr):
    X = np.asarray(X, dtype=float)
    return float(np.sum(X * X) / (10.0 ** (snr / 10.0) * X.size))


def add_noise(X, snr, seed):
    """Add i.i.d. Gaussian noise whose variance matches the target SNR (dB)."""
    X = np.asarray(X, dtype=float)
    if not np.isfinite(snr):
        raise ValueError("snr must be finite")
    rng = np.random.default_rng(seed)
    return X + rng.normal(0.0, np.sqrt(noise_variance(X, snr)), size=X.shape)


def generate(spec):
    ss = np.random.SeedSequence(spec.seed)
    data_seq, noise_seq = ss.spawn(2)
    rng = np.random.default_rng(data_seq)
    r = spec.r
    W = rng.uniform(0.0, 1.0, size=(spec.m, r))
    H = np.empty((r, spec.n1 + spec.n2))
    # round-robin facet assignment: facet k gets columns k, k+r, ...
    for k in range(r):
        cols = np.arange(k, spec.n1, r)
        H[:, cols] = _draw_columns(rng, r, cols.size, spec.purity, facet=k)
    H[:, spec.n1:] = _draw_columns(rng, r, spec.n2, spec.purity)
    if spec.include_vertices:
        H = np.hstack([H, np.eye(r)])
    X = W @ H
    inst = SyntheticInstance(spec, W, H, X, achieved_purity=purity_of(H))
    if spec.snr is not None:
        inst.X_noisy = add_noise(X, spec.snr, noise_seq)
    return inst
