"""Simplex-structured matrix factorization by maximum volume in the dual."""

from .solver import FactorizationResult, SolverConfig, SolverFailure, factorize, run_reduced
from .synthgen import SyntheticSpec, generate

__all__ = [
    "FactorizationResult",
    "SolverConfig",
    "SolverFailure",
    "SyntheticSpec",
    "factorize",
    "generate",
    "run_reduced",
]
