"""Input validation helpers for the estimator-style interfaces."""

from __future__ import annotations

import numpy as np

from .linalg import is_density, is_unitary


def check_unitary_matrix(u, name: str = "unitary") -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {u.shape}")
    verdict = is_unitary(u)
    if not verdict:
        raise ValueError(f"{name} is not unitary ({verdict.violation} violated)")
    return u


def check_density_matrix(m, name: str = "density") -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    verdict = is_density(m)
    if not verdict:
        raise ValueError(f"{name} is not a density matrix ({verdict.violation} violated)")
    return m


def check_density_stack(X) -> tuple:
    """Coerce X to a stack of density matrices.

    Accepts a single (d, d) matrix or an (n, d, d) stack; returns the stack
    and a flag telling the caller whether the input was a single matrix.
    """
    X = np.asarray(X, dtype=complex)
    single = X.ndim == 2
    if single:
        X = X[np.newaxis]
    if X.ndim != 3 or X.shape[1] != X.shape[2]:
        raise ValueError(f"expected (n, d, d) or (d, d) input, got shape {X.shape}")
    for i, m in enumerate(X):
        check_density_matrix(m, name=f"X[{i}]")
    return X, single
