"""Discrimination circuits that load a state onto a CTC register.

The construction: SWAP the incoming system onto the CTC rail, then apply a
flag-controlled correction sum_j |u_j><u_j| (x) O_j, where O_j unitarily
rotates the j-th candidate state onto the j-th flag vector. Run through the
CTC fixed-point dynamics, the circuit pins the CTC register to the flag
matching the input and writes that flag on the visible output, which
distinguishes candidate states that no linear device can tell apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, is_unitary, kron
from .states import NORM_TOL, PureState


@dataclass
class FlagBasis:
    """Orthonormal marker vectors measured on the visible output."""

    vectors: list

    def __post_init__(self):
        self.vectors = [np.asarray(v, dtype=complex).reshape(-1) for v in self.vectors]
        if not self.vectors:
            raise ValueError("flag basis needs at least one vector")
        dim = self.vectors[0].size
        gram = np.array([[np.vdot(a, b) for b in self.vectors] for a in self.vectors])
        if float(np.max(np.abs(gram - np.eye(len(self.vectors))))) > NORM_TOL:
            raise ValueError("flag vectors must be orthonormal")
        if any(v.size != dim for v in self.vectors):
            raise ValueError("flag vectors must share one dimension")

    @property
    def dim(self) -> int:
        return self.vectors[0].size

    def __len__(self) -> int:
        return len(self.vectors)

    def projector(self, j: int) -> np.ndarray:
        v = self.vectors[j]
        return np.outer(v, v.conj())

    @classmethod
    def computational(cls, dim: int) -> "FlagBasis":
        return cls(list(np.eye(dim)))


@dataclass
class Alphabet:
    """Candidate states to be discriminated; need not be orthogonal."""

    states: list

    def __post_init__(self):
        if not self.states:
            raise ValueError("alphabet needs at least one state")
        self.states = [
            s if isinstance(s, PureState) else PureState(np.asarray(s, dtype=complex))
            for s in self.states
        ]
        dims = {s.dim for s in self.states}
        if len(dims) != 1:
            raise ValueError(f"alphabet members live on different dimensions {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def __len__(self) -> int:
        return len(self.states)


def swap_operator(dim: int) -> np.ndarray:
    """Exchange of two dim-dimensional factors."""
    s = np.zeros((dim * dim, dim * dim))
    for a in range(dim):
        for b in range(dim):
            s[b * dim + a, a * dim + b] = 1.0
    return s


def controlled_u(flags: FlagBasis, ops: list) -> np.ndarray:
    """sum_j |u_j><u_j| (x) O_j with the control on the first factor."""
    if len(ops) != len(flags):
        raise ValueError(f"{len(ops)} operations for {len(flags)} flags")
    if len(flags) != flags.dim:
        # an incomplete flag set leaves a block unset; only full bases give a unitary
        raise ValueError("flag count must equal the control dimension")
    ops = [as_matrix(o) for o in ops]
    for o in ops:
        check = is_unitary(o)
        if not check:
            raise ValueError(f"controlled operation is not unitary: {check.violation} violated")
    return sum(kron(flags.projector(j), ops[j]) for j in range(len(ops)))


def completion_unitary(src, dst) -> np.ndarray:
    """Unitary rotating src onto dst exactly, acting as identity elsewhere.

    Rotates within span{src, dst} by the angle between them with the phase
    chosen so O @ src == dst; for (anti)parallel vectors a global phase on
    the identity does the job.
    """
    s = src.amplitudes if isinstance(src, PureState) else np.asarray(src, dtype=complex).reshape(-1)
    t = dst.amplitudes if isinstance(dst, PureState) else np.asarray(dst, dtype=complex).reshape(-1)
    if s.size != t.size:
        raise ValueError("source and destination dimensions differ")
    s = s / np.linalg.norm(s)
    t = t / np.linalg.norm(t)
    c = np.vdot(s, t)
    w = t - c * s
    r = float(np.linalg.norm(w))
    dim = s.size
    if r < 1e-12:
        return (c / abs(c)) * np.eye(dim)
    u2 = w / r
    eye = np.eye(dim, dtype=complex)
    out = (
        eye
        + (c - 1.0) * np.outer(s, s.conj())
        - r * np.outer(s, u2.conj())
        + r * np.outer(u2, s.conj())
        + (np.conj(c) - 1.0) * np.outer(u2, u2.conj())
    )
    return out


def _residual_direction(vector, basis: list, tol: float = 1e-9):
    v = np.asarray(vector, dtype=complex).reshape(-1).copy()
    for b in basis:
        v -= np.vdot(b, v) * b
    norm = float(np.linalg.norm(v))
    return v / norm if norm > tol else None


def _spreading_completions(alphabet: Alphabet, flags: FlagBasis) -> list:
    """Completions that scatter every wrong-flag branch across the other flags.

    Each O_j still maps the j-th candidate onto the j-th flag. The remaining
    candidate directions are sent to uniform-modulus mixtures (discrete
    Fourier columns) over the other flags, so a loop state parked on a wrong
    flag keeps leaking probability until only the right flag survives.
    """
    n = flags.dim
    ops = []
    for j in range(n):
        sources = [alphabet.states[j].amplitudes]
        for k in range(n):
            if k != j:
                d = _residual_direction(alphabet.states[k].amplitudes, sources)
                if d is not None:
                    sources.append(d)
        for f in range(n):
            d = _residual_direction(flags.vectors[f], sources)
            if d is not None:
                sources.append(d)
        others = [flags.vectors[m] for m in range(n) if m != j]
        m = len(others)
        targets = [flags.vectors[j]]
        for t in range(len(sources) - 1):
            phases = np.exp(2j * np.pi * t * np.arange(m) / m)
            targets.append(sum(p * o for p, o in zip(phases, others)) / math.sqrt(m))
        ops.append(sum(np.outer(t_, s_.conj()) for t_, s_ in zip(targets, sources)))
    return ops


def _forces_unique_loop_state(circuit: np.ndarray, alphabet: Alphabet) -> bool:
    from .deutsch import KERNEL_TOL, DeutschInstance, superoperator

    n = alphabet.dim
    eye = np.eye(n * n)
    for member in alphabet.states:
        s = superoperator(DeutschInstance(circuit, member.density(), (n, n)))
        svals = np.linalg.svd(s - eye, compute_uv=False)
        if int(np.sum(svals <= KERNEL_TOL)) != 1:
            return False
    return True


def brun_circuit(alphabet: Alphabet, flags: FlagBasis) -> np.ndarray:
    """Discrimination unitary: flag-controlled corrections after a SWAP.

    The deterministic read-out needs every candidate to force a unique loop
    state. Minimal rotations onto the flags are tried first and kept when
    they already do that (an orthonormal alphabet aligned with its flags
    reduces to a plain SWAP this way). When a candidate leaves extra fixed
    states, for example because some candidates already coincide with flags
    and their completions collapse to the identity, the spreading
    completions are used instead.
    """
    if len(alphabet) != len(flags):
        raise ValueError(f"{len(alphabet)} alphabet states for {len(flags)} flags")
    if alphabet.dim != flags.dim:
        raise ValueError("alphabet and flags must share one dimension")
    if len(alphabet) != alphabet.dim:
        raise ValueError("need exactly one alphabet state per flag-space dimension")
    swap = swap_operator(alphabet.dim)
    ops = [
        completion_unitary(alphabet.states[j], flags.vectors[j])
        for j in range(len(alphabet))
    ]
    circuit = controlled_u(flags, ops) @ swap
    if _forces_unique_loop_state(circuit, alphabet):
        return circuit
    return controlled_u(flags, _spreading_completions(alphabet, flags)) @ swap


def four_state_alphabet() -> tuple:
    """The canonical linearly dependent alphabet and its flag basis.

    Alphabet members are the four equatorial/polar qubit states z+, z-, x+,
    x-, each joined with a fixed |z+> ancilla. The flags are the two-qubit
    computational vectors arranged so the first pair marks the z states and
    the second pair marks the x states.
    """
    s = 1 / math.sqrt(2)
    z_plus = np.array([1.0, 0.0], dtype=complex)
    z_minus = np.array([0.0, 1.0], dtype=complex)
    x_plus = np.array([s, s], dtype=complex)
    x_minus = np.array([s, -s], dtype=complex)
    rails = [
        PureState(np.kron(member, z_plus), (2, 2))
        for member in (z_plus, z_minus, x_plus, x_minus)
    ]
    e = np.eye(4, dtype=complex)
    flags = FlagBasis([e[0], e[2], e[1], e[3]])
    return Alphabet(rails), flags
