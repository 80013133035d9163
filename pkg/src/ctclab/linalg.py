"""Dense complex linear algebra for small multipartite quantum systems.

Conventions used across the package:

* Tensor products are lexicographic: ``kron(a, b)`` puts ``a`` on the
  leftmost factor, so basis state ``|i>|j>`` has flat index ``i * dim_b + j``.
* A composite dimension is described by a ``DimensionSplit``, a plain tuple
  of per-factor dimensions whose product equals the matrix dimension.
* Vectorization is column-stacking: ``vec(A @ X @ B) == kron(B.T, A) @ vec(X)``.
* Entropies are in bits (base-2 logarithms).

Everything operates on ``numpy.ndarray`` with complex dtype; helpers accept
any array-like, including objects exposing a ``.matrix`` attribute.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DimensionSplit = tuple  # per-factor dimensions, e.g. (2, 2) for two qubits

HERMITICITY_TOL = 1e-10
POSITIVITY_SLACK = 1e-10


@dataclass
class CheckResult:
    """Boolean verdict plus the name of the first violated condition."""

    ok: bool
    violation: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def as_matrix(m) -> np.ndarray:
    """Coerce an array-like (or object with a .matrix attribute) to complex ndarray."""
    if hasattr(m, "matrix"):
        m = m.matrix
    return np.asarray(m, dtype=complex)


def kron(a, b) -> np.ndarray:
    """Tensor product with the first argument on the leftmost factor."""
    return np.kron(as_matrix(a), as_matrix(b))


def dagger(m) -> np.ndarray:
    """Conjugate transpose."""
    return as_matrix(m).conj().T


def vec(m) -> np.ndarray:
    """Column-stacking vectorization of a square matrix."""
    return as_matrix(m).reshape(-1, order="F")


def unvec(v, dim: int) -> np.ndarray:
    """Inverse of :func:`vec` for a dim x dim matrix."""
    return np.asarray(v, dtype=complex).reshape((dim, dim), order="F")


def check_split(split: DimensionSplit, dim: int) -> tuple[int, ...]:
    split = tuple(int(d) for d in split)
    if not split or any(d < 1 for d in split):
        raise ValueError(f"invalid dimension split {split}")
    if int(np.prod(split)) != dim:
        raise ValueError(f"dimension split {split} does not factor dimension {dim}")
    return split


def partial_trace(m, split: DimensionSplit, keep: int) -> np.ndarray:
    """Trace out all tensor factors except one.

    Parameters
    ----------
    m : array-like
        Square matrix on the full product space. Hermiticity is not assumed;
        the operation is plain index contraction.
    split : tuple of int
        Per-factor dimensions; their product must equal the matrix dimension.
    keep : int
        Index of the factor to keep.

    Returns
    -------
    ndarray
        The reduced matrix on the kept factor. The trace is preserved.
    """
    m = as_matrix(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"partial_trace needs a square matrix, got shape {m.shape}")
    split = check_split(split, m.shape[0])
    if not 0 <= keep < len(split):
        raise ValueError(f"keep index {keep} out of range for split {split}")
    before = int(np.prod(split[:keep], dtype=int)) if keep else 1
    after = int(np.prod(split[keep + 1:], dtype=int)) if keep + 1 < len(split) else 1
    t = m.reshape(before, split[keep], after, before, split[keep], after)
    return np.einsum("aibajb->ij", t)


def eig_hermitian(m, tol: float = HERMITICITY_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with real eigenvalues in ascending
    order and orthonormal eigenvector columns, so that
    ``m == eigenvectors @ diag(eigenvalues) @ eigenvectors.conj().T``.
    Raises ``ValueError`` if the input is not Hermitian within ``tol`` and
    ``numpy.linalg.LinAlgError`` if the solver fails to converge.
    """
    m = as_matrix(m)
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian: max deviation {dev:.3e} > {tol:.1e}")
    w, v = np.linalg.eigh(m)
    return w, v


def trace_distance(r, s) -> float:
    """Half the trace norm of the difference of two Hermitian matrices."""
    diff = as_matrix(r) - as_matrix(s)
    w, _ = eig_hermitian(diff)
    return 0.5 * float(np.sum(np.abs(w)))


def entropy(rho, slack: float = POSITIVITY_SLACK) -> float:
    """Von Neumann entropy in bits, with 0 log 0 = 0.

    Eigenvalues in [-slack, 0) are clamped to zero; anything more negative
    means the input is not a state and raises ``ValueError``.
    """
    w, _ = eig_hermitian(rho)
    if w.min() < -slack:
        raise ValueError(f"entropy of a non-positive matrix: min eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    nz = w[w > 0.0]
    return float(-np.sum(nz * np.log2(nz)))


def is_density(m, tol: float = 1e-10) -> CheckResult:
    """Check Hermiticity, positivity, and unit trace, in that order."""
    m = as_matrix(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return CheckResult(False, "shape")
    if float(np.max(np.abs(m - m.conj().T))) > tol:
        return CheckResult(False, "hermiticity")
    w = np.linalg.eigvalsh(m)
    if float(w.min()) < -tol:
        return CheckResult(False, "positivity")
    if abs(float(np.real(np.trace(m))) - 1.0) > tol:
        return CheckResult(False, "trace")
    return CheckResult(True)


def is_unitary(m, tol: float = 1e-10) -> CheckResult:
    m = as_matrix(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return CheckResult(False, "shape")
    gram = m.conj().T @ m
    if float(np.max(np.abs(gram - np.eye(m.shape[0])))) > tol:
        return CheckResult(False, "unitarity")
    return CheckResult(True)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix with phase fixing."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random full-rank density matrix (Ginibre ensemble unless rank is given)."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return m / np.real(np.trace(m))
