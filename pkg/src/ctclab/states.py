"""Pure states, density matrices, and measurements for qubit registers.

Density matrices carry a provenance tag recording how they were prepared:
``proper`` for explicit probabilistic mixtures of pure states, ``improper``
for reductions of a larger entangled state, ``unspecified`` otherwise. The
tag is metadata. No arithmetic here branches on it; the experiments module
is the one place where the distinction changes what gets computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DimensionSplit,
    as_matrix,
    check_split,
    is_density,
    kron,
    partial_trace,
)

NORM_TOL = 1e-10
PROB_FLOOR = 1e-12

PROVENANCES = ("proper", "improper", "unspecified")


@dataclass
class PureState:
    """Normalized state vector on a product of finite factors."""

    amplitudes: np.ndarray
    split: DimensionSplit = ()

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if not self.split:
            self.split = (self.amplitudes.size,)
        self.split = check_split(self.split, self.amplitudes.size)
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state vector norm {norm} is not 1 within {NORM_TOL}")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self, provenance: str = "unspecified") -> "DensityMatrix":
        return DensityMatrix(self.projector(), self.split, provenance)

    def overlaps(self, other: "PureState") -> bool:
        """Equality up to global phase: |<self|other>| = 1."""
        return abs(abs(np.vdot(self.amplitudes, other.amplitudes)) - 1.0) < NORM_TOL


@dataclass
class DensityMatrix:
    """Valid density matrix together with its factor split and provenance."""

    matrix: np.ndarray
    split: DimensionSplit = ()
    provenance: str = "unspecified"

    def __post_init__(self):
        self.matrix = as_matrix(self.matrix)
        if not self.split:
            self.split = (self.matrix.shape[0],)
        self.split = check_split(self.split, self.matrix.shape[0])
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        check = is_density(self.matrix)
        if not check:
            raise ValueError(f"not a density matrix: {check.violation} violated")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass
class Ensemble:
    """Probabilistic ensemble of pure states on a common space."""

    members: list = field(default_factory=list)  # (probability, PureState) pairs

    def __post_init__(self):
        if not self.members:
            raise ValueError("ensemble needs at least one member")
        probs = np.array([p for p, _ in self.members], dtype=float)
        if probs.min() < -PROB_FLOOR:
            raise ValueError("ensemble probabilities must be nonnegative")
        if abs(probs.sum() - 1.0) > NORM_TOL:
            raise ValueError(f"ensemble probabilities sum to {probs.sum()}, not 1")
        dims = {psi.dim for _, psi in self.members}
        if len(dims) != 1:
            raise ValueError(f"ensemble members live on different dimensions {sorted(dims)}")


@dataclass
class MeasurementBasis:
    """Complete set of orthogonal projectors with outcome labels."""

    projectors: list
    labels: list

    def __post_init__(self):
        self.projectors = [as_matrix(p) for p in self.projectors]
        if len(self.projectors) != len(self.labels):
            raise ValueError("one label per projector required")
        dim = self.projectors[0].shape[0]
        total = np.zeros((dim, dim), dtype=complex)
        for p in self.projectors:
            if float(np.max(np.abs(p - p.conj().T))) > NORM_TOL:
                raise ValueError("projectors must be Hermitian")
            if float(np.max(np.abs(p @ p - p))) > NORM_TOL:
                raise ValueError("projectors must be idempotent")
            total = total + p
        for i, p in enumerate(self.projectors):
            for q in self.projectors[i + 1:]:
                if float(np.max(np.abs(p @ q))) > NORM_TOL:
                    raise ValueError("projectors must be mutually orthogonal")
        if float(np.max(np.abs(total - np.eye(dim)))) > NORM_TOL:
            raise ValueError("projectors must sum to the identity")

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @classmethod
    def from_vectors(cls, vectors, labels) -> "MeasurementBasis":
        vecs = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
        return cls([np.outer(v, v.conj()) for v in vecs], list(labels))

    @classmethod
    def z_basis(cls) -> "MeasurementBasis":
        return cls.from_vectors([[1, 0], [0, 1]], ["z+", "z-"])

    @classmethod
    def x_basis(cls) -> "MeasurementBasis":
        s = 1 / math.sqrt(2)
        return cls.from_vectors([[s, s], [s, -s]], ["x+", "x-"])


@dataclass
class MeasurementResult:
    probabilities: dict
    collapsed: dict  # label -> DensityMatrix, only for outcomes with weight


def bloch_state(theta: float, phi: float) -> PureState:
    """Qubit state at polar angle theta and azimuth phi on the Bloch sphere."""
    return PureState(
        np.array([math.cos(theta / 2), math.sin(theta / 2) * np.exp(1j * phi)]),
        (2,),
    )


def bell_singlet() -> PureState:
    """Two-qubit singlet (|z+ z-> - |z- z+>) / sqrt(2)."""
    s = 1 / math.sqrt(2)
    return PureState(np.array([0, s, -s, 0]), (2, 2))


def proper_mixture(ensemble: Ensemble) -> DensityMatrix:
    """Density matrix of an explicit ensemble; tagged proper."""
    _, first = ensemble.members[0]
    acc = np.zeros((first.dim, first.dim), dtype=complex)
    for p, psi in ensemble.members:
        acc = acc + p * psi.projector()
    return DensityMatrix(acc, first.split, "proper")


def reduce(psi: PureState, keep: int) -> DensityMatrix:
    """Reduced state of one factor of a pure state; tagged improper."""
    if len(psi.split) < 2:
        raise ValueError("reduce needs a state with at least two factors")
    reduced = partial_trace(psi.projector(), psi.split, keep)
    return DensityMatrix(reduced, (psi.split[keep],), "improper")


def measure(rho: DensityMatrix, basis: MeasurementBasis) -> MeasurementResult:
    """Born-rule outcome probabilities and collapsed states; no sampling."""
    m = as_matrix(rho)
    if basis.dim != m.shape[0]:
        raise ValueError(f"basis dimension {basis.dim} does not match state dimension {m.shape[0]}")
    probs: dict = {}
    collapsed: dict = {}
    for label, proj in zip(basis.labels, basis.projectors):
        p = float(np.real(np.trace(proj @ m)))
        p = 0.0 if abs(p) < PROB_FLOOR else p
        probs[label] = p
        if p > PROB_FLOOR:
            post = proj @ m @ proj / p
            collapsed[label] = DensityMatrix(post, getattr(rho, "split", ()) or (m.shape[0],), "proper")
    total = sum(probs.values())
    if abs(total - 1.0) > NORM_TOL:
        raise ValueError(f"outcome probabilities sum to {total}, not 1")
    return MeasurementResult(probs, collapsed)


def _projector_vector(proj: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(proj)
    if abs(w[-1] - 1.0) > NORM_TOL or (len(w) > 1 and abs(w[-2]) > NORM_TOL):
        raise ValueError("rank-1 projector required")
    return v[:, -1]


def remote_collapse(
    psi: PureState, alice_basis: MeasurementBasis, rng: np.random.Generator
) -> tuple:
    """Sample Alice's outcome on factor 0 and return Bob's conditional pure state.

    The outcome is drawn from the Born distribution with the supplied
    generator. Bob's state is pure (defined up to global phase); density
    matrices built from it downstream describe the post-collapse frame.
    """
    if len(psi.split) != 2:
        raise ValueError("remote_collapse needs a bipartite pure state")
    da, db = psi.split
    if alice_basis.dim != da:
        raise ValueError("Alice's basis does not match her factor dimension")
    amp = psi.amplitudes.reshape(da, db)
    vectors = [_projector_vector(p) for p in alice_basis.projectors]
    conditionals = [v.conj() @ amp for v in vectors]
    probs = np.array([float(np.real(np.vdot(c, c))) for c in conditionals])
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    k = int(rng.choice(len(vectors), p=probs))
    if probs[k] <= PROB_FLOOR:
        raise ValueError("sampled an outcome with vanishing probability")
    bob = conditionals[k] / np.linalg.norm(conditionals[k])
    return alice_basis.labels[k], PureState(bob, (db,))
