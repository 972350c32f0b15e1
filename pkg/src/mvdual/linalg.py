"""Dense linear algebra kernel shared by every other module.

Thin wrappers over numpy/scipy LAPACK routines with the conventions the
rest of the package relies on: finite-input checks, a deterministic sign
convention for singular vectors, and a relative pivot threshold for
singularity.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

PIVOT_TOL = 1e-12


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a pivot falls below the relative singularity threshold."""

    def __init__(self, pivot_index, pivot_value=0.0):
        self.pivot_index = int(pivot_index)
        self.pivot_value = float(pivot_value)
        super().__init__(
            f"matrix is singular to working precision (pivot {self.pivot_index}"
            f" = {self.pivot_value:.3e})"
        )


def as_matrix(A, name="matrix"):
    """Convert to a 2-d float array and reject NaN/Inf entries."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    return A


@dataclass(frozen=True)
class TruncatedSvd:
    left_basis: np.ndarray
    singular_values: np.ndarray
    right_basis: np.ndarray

    def reconstruct(self):
        return (self.left_basis * self.singular_values) @ self.right_basis.T


def _fix_signs(U, V):
    # largest-magnitude entry of each left vector made positive
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs, V * signs


def truncated_svd(A, k):
    """Best rank-``k`` factors ``U, s, V`` of ``A`` with ``A ~ U diag(s) V^T``."""
    A = as_matrix(A, "A")
    m, n = A.shape
    if not 1 <= k <= min(m, n):
        raise ValueError(f"rank k={k} out of range [1, {min(m, n)}]")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    U, V = _fix_signs(U[:, :k], Vt[:k].T)
    return TruncatedSvd(U, s[:k].copy(), V)


def determinant(A):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"determinant needs a square matrix, got {A.shape}")
    if A.shape[0] == 0:
        return 1.0
    return float(np.linalg.det(A))


def _lu_checked(A):
    A = as_matrix(A, "A")
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got {A.shape}")
    with warnings.catch_warnings():
        # exact singularity is reported below through SingularMatrixError
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=False)
    diag = np.abs(np.diag(lu))
    scale = np.max(np.abs(A)) if A.size else 0.0
    bad = np.nonzero(diag <= PIVOT_TOL * scale)[0]
    if scale == 0.0 or bad.size:
        i = int(bad[0]) if bad.size else 0
        raise SingularMatrixError(i, diag[i] if diag.size else 0.0)
    return lu, piv


def solve(A, B):
    """Solve ``A X = B``; raises :class:`SingularMatrixError` on tiny pivots."""
    lu, piv = _lu_checked(A)
    B = np.asarray(B, dtype=float)
    return sla.lu_solve((lu, piv), B, check_finite=False)


def inverse(A):
    A = np.asarray(A, dtype=float)
    return solve(A, np.eye(A.shape[0]))
