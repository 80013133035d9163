"""Fixed-point dynamics of a chronology-respecting system coupled to a
closed-timelike-curve register.

The model: a unitary U acts on CR x CTC, the CTC register is required to
return to the same state it entered with,

    rho_ctc = tr_CR[ U (rho_in (x) rho_ctc) U^dag ],

and the visible output is the complementary reduction

    rho_out = tr_CTC[ U (rho_in (x) rho_ctc) U^dag ].

The consistency condition is linear in rho_ctc, so the fixed set is the
eigenvalue-1 subspace of a superoperator; the physical state reported by
the solver is the maximum-entropy density matrix inside that subspace.
Because the fixed point depends on rho_in, the induced CR channel is
nonlinear in rho_in even though each run is ordinary quantum mechanics.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    as_matrix,
    dagger,
    entropy,
    is_density,
    is_unitary,
    kron,
    partial_trace,
    trace_distance,
    unvec,
    vec,
)
from .serialize import matrix_to_json
from .states import DensityMatrix

logger = logging.getLogger("ctclab.deutsch")

KERNEL_TOL = 1e-9
RESIDUAL_TOL = 1e-10
ASCENT_TOL = 1e-10  # stop when an ascent step improves entropy by less than this


class FixedPointError(RuntimeError):
    """Raised when no density-matrix fixed point can be produced numerically."""


@dataclass
class DeutschInstance:
    """A CR-CTC interaction unitary together with the CR input state.

    Factor order is (CR, CTC): ``split == (d_cr, d_ctc)`` and the unitary
    acts on the d_cr * d_ctc product space with CR leftmost.
    """

    unitary: np.ndarray
    cr_input: DensityMatrix
    split: tuple = ()

    def __post_init__(self):
        self.unitary = as_matrix(self.unitary)
        check = is_unitary(self.unitary)
        if not check:
            raise ValueError(f"interaction is not unitary: {check.violation} violated")
        if not isinstance(self.cr_input, DensityMatrix):
            self.cr_input = DensityMatrix(as_matrix(self.cr_input))
        n = self.unitary.shape[0]
        d_cr = self.cr_input.dim
        if not self.split:
            if n % d_cr:
                raise ValueError(f"unitary dimension {n} is not a multiple of CR dimension {d_cr}")
            self.split = (d_cr, n // d_cr)
        self.split = (int(self.split[0]), int(self.split[1]))
        if self.split[0] != d_cr or self.split[0] * self.split[1] != n:
            raise ValueError(f"split {self.split} inconsistent with dimensions {d_cr}, {n}")

    @property
    def d_cr(self) -> int:
        return self.split[0]

    @property
    def d_ctc(self) -> int:
        return self.split[1]


@dataclass
class FixedPointReport:
    """Solver output: the selected CTC state and how it was found."""

    chosen: DensityMatrix
    fixed_space_dim: int
    residual: float
    entropy_bits: float
    method: str  # "kernel" or "iteration"
    selection_rule: str = "max-entropy"
    basis_of_fixed_space: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "chosen": matrix_to_json(self.chosen.matrix),
            "fixed_space_dim": self.fixed_space_dim,
            "residual": self.residual,
            "entropy_bits": self.entropy_bits,
            "method": self.method,
            "selection_rule": self.selection_rule,
        }


def _joint_after(inst: DeutschInstance, rho_ctc) -> np.ndarray:
    joint = kron(inst.cr_input.matrix, as_matrix(rho_ctc))
    return inst.unitary @ joint @ dagger(inst.unitary)


def deutsch_map(inst: DeutschInstance, rho_ctc) -> DensityMatrix:
    """One traversal of the CTC register: tr_CR[U (rho_in (x) rho_ctc) U^dag]."""
    out = partial_trace(_joint_after(inst, rho_ctc), inst.split, keep=1)
    return DensityMatrix(_as_density_array(out), (inst.d_ctc,))


def cr_output(inst: DeutschInstance, rho_ctc) -> DensityMatrix:
    """Visible output: tr_CTC[U (rho_in (x) rho_ctc) U^dag]."""
    out = partial_trace(_joint_after(inst, rho_ctc), inst.split, keep=0)
    return DensityMatrix(_as_density_array(out), (inst.d_cr,))


def _as_density_array(m: np.ndarray) -> np.ndarray:
    # symmetrize and clamp roundoff so downstream validation at 1e-10 is honest
    m = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    m = (v * w) @ v.conj().T
    return m / np.real(np.trace(m))


def _kraus_ops(inst: DeutschInstance) -> np.ndarray:
    """Kraus operators of the CTC-side map rho -> tr_CR[U (rho_in (x) rho) U^dag]."""
    d_cr, d_ctc = inst.split
    w, v = np.linalg.eigh(inst.cr_input.matrix)
    w = np.clip(w, 0.0, None)
    u4 = inst.unitary.reshape(d_cr, d_ctc, d_cr, d_ctc)
    ops = []
    for m in range(d_cr):
        if w[m] <= 0.0:
            continue
        block = np.einsum("c,kbcd->kbd", v[:, m], u4)  # (d_cr, d_ctc, d_ctc)
        for k in range(d_cr):
            ops.append(np.sqrt(w[m]) * block[k])
    return np.array(ops)


def _apply_kraus(ops: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return np.einsum("nij,jk,nlk->il", ops, rho, ops.conj())


def superoperator(inst: DeutschInstance) -> np.ndarray:
    """Column-stacking matrix of the CTC-side map, size d_ctc^2 x d_ctc^2."""
    ops = _kraus_ops(inst)
    d2 = inst.d_ctc ** 2
    s = np.zeros((d2, d2), dtype=complex)
    for a in ops:
        s += np.kron(a.conj(), a)
    return s


def _hermitian_fixed_basis(s: np.ndarray, dim: int, kernel_tol: float) -> list:
    """Orthonormal Hermitian basis of the eigenvalue-1 subspace of s."""
    d2 = dim * dim
    _, sv, vh = np.linalg.svd(s - np.eye(d2))
    null_vectors = [vh[i].conj() for i in range(d2) if sv[i] <= kernel_tol]
    if not null_vectors:
        raise FixedPointError(
            f"no fixed subspace found: smallest singular value {sv[-1]:.3e} > {kernel_tol:.1e}"
        )
    # the fixed subspace is closed under the adjoint, so its Hermitian part
    # spans it over the reals; orthonormalize in the Frobenius inner product
    candidates = []
    for nv in null_vectors:
        m = unvec(nv, dim)
        candidates.append((m + m.conj().T) / 2)
        candidates.append((m - m.conj().T) / 2j)
    rows = np.array(
        [np.concatenate([np.real(c).ravel(), np.imag(c).ravel()]) for c in candidates]
    )
    _, sv2, vh2 = np.linalg.svd(rows)
    rank = int(np.sum(sv2 > 1e-8 * max(1.0, sv2[0])))
    basis = []
    for i in range(rank):
        flat = vh2[i]
        m = flat[:d2].reshape(dim, dim) + 1j * flat[d2:].reshape(dim, dim)
        basis.append((m + m.conj().T) / 2)
    return basis


def _averaged_superoperator(s: np.ndarray, doublings: int = 11) -> np.ndarray:
    """Cesaro average of powers of s over a window of 2**doublings terms.

    The window is kept moderate: eigenvalue-1 roundoff grows linearly with
    the window length, so a huge window would corrupt the fixed component.
    """
    avg = s.copy()
    power = s.copy()
    for _ in range(doublings):
        avg = avg @ (np.eye(s.shape[0]) + power) / 2
        power = power @ power
    return avg


class _FixedSlice:
    """Affine coordinates on the unit-trace slice of the fixed subspace."""

    def __init__(self, basis: list):
        self.basis = basis
        t = np.array([float(np.real(np.trace(h))) for h in basis])
        t2 = float(t @ t)
        if t2 < 1e-16:
            raise FixedPointError("fixed subspace contains no unit-trace element")
        self.base = sum((t[k] / t2) * basis[k] for k in range(len(basis)))
        if len(basis) == 1:
            self.directions = []
        else:
            _, _, vh = np.linalg.svd(t[None, :])
            self.directions = [
                sum(vh[j, k] * basis[k] for k in range(len(basis)))
                for j in range(1, len(basis))
            ]

    def point(self, y: np.ndarray) -> np.ndarray:
        m = self.base.copy()
        for yj, tj in zip(y, self.directions):
            m = m + yj * tj
        return m

    def coords(self, m: np.ndarray) -> np.ndarray:
        return np.array(
            [float(np.real(np.trace(tj.conj().T @ (m - self.base)))) for tj in self.directions]
        )

    def project_gradient(self, g: np.ndarray) -> np.ndarray:
        return np.array(
            [float(np.real(np.trace(tj.conj().T @ g))) for tj in self.directions]
        )


def _repair_positivity(slice_: _FixedSlice, y: np.ndarray) -> np.ndarray:
    """Supgradient ascent on the smallest eigenvalue within the slice."""
    if not slice_.directions:
        return y
    lam = float(np.linalg.eigvalsh(slice_.point(y))[0])
    for _ in range(200):
        if lam >= -1e-12:
            break
        w, v = np.linalg.eigh(slice_.point(y))
        vmin = v[:, 0]
        grad = np.array(
            [float(np.real(vmin.conj() @ tj @ vmin)) for tj in slice_.directions]
        )
        gn = float(np.linalg.norm(grad))
        if gn < 1e-14:
            break
        grad /= gn
        step = 1.0
        while step > 1e-14:
            cand = y + step * grad
            lam_c = float(np.linalg.eigvalsh(slice_.point(cand))[0])
            if lam_c > lam + 1e-16:
                y, lam = cand, lam_c
                break
            step /= 2
        else:
            break
    return y


def _entropy_clamped(m: np.ndarray) -> float:
    w = np.clip(np.linalg.eigvalsh(m), 0.0, None)
    nz = w[w > 0.0]
    return float(-np.sum(nz * np.log2(nz)))


def _max_entropy_point(slice_: _FixedSlice, y0: np.ndarray) -> np.ndarray:
    """Projected gradient ascent of the von Neumann entropy over the slice."""
    y = y0
    fval = _entropy_clamped(slice_.point(y))
    floor = 1e-18
    for _ in range(500):
        w, v = np.linalg.eigh(slice_.point(y))
        g = -(v * np.log2(np.clip(w, floor, None))) @ v.conj().T
        gy = slice_.project_gradient(g)
        gn = float(np.linalg.norm(gy))
        if gn < 1e-11:
            break
        gy /= gn
        improvement = 0.0
        step = 1.0
        while step > 1e-14:
            cand = y + step * gy
            wc = np.linalg.eigvalsh(slice_.point(cand))
            if float(wc.min()) >= -1e-12:
                fc = _entropy_clamped(slice_.point(cand))
                if fc > fval:
                    improvement = fc - fval
                    y, fval = cand, fc
                    break
            step /= 2
        if improvement < ASCENT_TOL:
            break
    return y


def solve_fixed_points(
    inst: DeutschInstance,
    kernel_tol: float = KERNEL_TOL,
    residual_tol: float = RESIDUAL_TOL,
) -> FixedPointReport:
    """Find the fixed subspace of the CTC map and select the max-entropy state.

    The subspace is the kernel of (S - 1) for the column-stacked
    superoperator S (singular values <= kernel_tol count as zero). When it
    is more than one-dimensional, the reported state maximizes the von
    Neumann entropy over the density matrices it contains; the full
    Hermitian basis is included in the report so non-uniqueness is visible
    to callers. Falls back to power iteration if the kernel route fails
    to meet the residual tolerance.
    """
    d = inst.d_ctc
    s = superoperator(inst)
    basis = _hermitian_fixed_basis(s, d, kernel_tol)
    dim_fixed = len(basis)
    logger.debug("fixed subspace dimension %d at d_ctc=%d", dim_fixed, d)

    chosen = None
    try:
        slice_ = _FixedSlice(basis)
        if dim_fixed == 1:
            candidate = slice_.base
        else:
            avg = _averaged_superoperator(s)
            start = unvec(avg @ vec(np.eye(d) / d), d)
            start = sum(
                float(np.real(np.trace(h.conj().T @ start))) * h for h in basis
            )
            tr = float(np.real(np.trace(start)))
            y0 = slice_.coords(start / tr) if abs(tr) > 0.1 else np.zeros(dim_fixed - 1)
            y0 = _repair_positivity(slice_, y0)
            y_star = _max_entropy_point(slice_, y0)
            candidate = slice_.point(y_star)
        chosen = _as_density_array(candidate)
    except FixedPointError:
        chosen = None

    method = "kernel"
    if chosen is not None:
        residual = trace_distance(chosen, deutsch_map(inst, chosen).matrix)
    if chosen is None or residual > residual_tol:
        fallback = iterate_fixed_point(inst, tol=residual_tol / 2)
        chosen = fallback.matrix
        residual = trace_distance(chosen, deutsch_map(inst, chosen).matrix)
        method = "iteration"
        if residual > residual_tol:
            raise FixedPointError(
                f"no density fixed point found: residual {residual:.3e} > {residual_tol:.1e}"
            )

    state = DensityMatrix(chosen, (d,))
    return FixedPointReport(
        chosen=state,
        fixed_space_dim=dim_fixed,
        residual=float(residual),
        entropy_bits=entropy(state.matrix),
        method=method,
        basis_of_fixed_space=basis,
    )


def iterate_fixed_point(
    inst: DeutschInstance,
    rho0=None,
    tol: float = RESIDUAL_TOL,
    max_iter: int = 200_000,
) -> DensityMatrix:
    """Fixed point by averaged iteration of the CTC map.

    Produces the Cesaro average of map iterates over windows of doubling
    length, reseeding each window at the end of the previous orbit. A plain
    running average from a fixed seed has a residual that decays only like
    1/N even on rapidly mixing instances (the residual telescopes to the
    first-vs-last orbit difference over N), so windowed restarts are what
    make tight tolerances reachable; each window average is itself an exact
    Cesaro average of the orbit. Raises FixedPointError with the final
    residual if max_iter map applications are exhausted.
    """
    d = inst.d_ctc
    if rho0 is None:
        sigma = np.eye(d, dtype=complex) / d
    else:
        sigma = as_matrix(rho0)
        check = is_density(sigma)
        if not check:
            raise ValueError(f"seed is not a density matrix: {check.violation} violated")
        if sigma.shape[0] != d:
            raise ValueError(f"seed dimension {sigma.shape[0]} does not match CTC dimension {d}")
    ops = _kraus_ops(inst)
    used = 0
    window = 1
    residual = np.inf
    while used < max_iter:
        count = min(window, max_iter - used)
        acc = np.zeros_like(sigma)
        cur = sigma
        for _ in range(count):
            cur = _apply_kraus(ops, cur)
            acc += cur
        used += count
        avg = acc / count
        residual = trace_distance(avg, _apply_kraus(ops, avg))
        if residual <= tol:
            logger.debug("iteration converged after %d applications", used)
            return DensityMatrix(_as_density_array(avg), (d,))
        sigma = cur
        window *= 2
    raise FixedPointError(
        f"iteration did not converge after {used} applications; final residual {residual:.3e}"
    )


def evolve(inst: DeutschInstance, **solve_kwargs) -> DensityMatrix:
    """CR output at the solver's chosen fixed point."""
    report = solve_fixed_points(inst, **solve_kwargs)
    return cr_output(inst, report.chosen.matrix)
