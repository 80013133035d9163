"""Post-selected teleportation model of a CTC (P-CTC).

Tracing the interaction unitary over the CTC register leaves a single
effective operator C on the visible system; outputs are renormalized after
post-selection,

    rho_out = C rho C^dag / tr(C rho C^dag).

The map is linear up to the normalization and, unlike the fixed-point
model, need not distinguish linearly dependent inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, is_unitary, partial_trace
from .states import DensityMatrix

POST_SELECTION_FLOOR = 1e-12


class PostSelectionError(RuntimeError):
    """Raised when the post-selection probability vanishes."""


@dataclass
class PctcInstance:
    """Interaction unitary on CR x CTC, factor order (CR, CTC)."""

    unitary: np.ndarray
    split: tuple

    def __post_init__(self):
        self.unitary = as_matrix(self.unitary)
        check = is_unitary(self.unitary)
        if not check:
            raise ValueError(f"interaction is not unitary: {check.violation} violated")
        self.split = (int(self.split[0]), int(self.split[1]))
        if self.split[0] * self.split[1] != self.unitary.shape[0]:
            raise ValueError(
                f"split {self.split} does not factor dimension {self.unitary.shape[0]}"
            )

    @property
    def d_cr(self) -> int:
        return self.split[0]


def pctc_operator(inst: PctcInstance) -> np.ndarray:
    """Effective operator C = tr_CTC(U) acting on the visible system."""
    return partial_trace(inst.unitary, inst.split, keep=0)


def pctc_map(c_op, rho) -> DensityMatrix:
    """Renormalized action C rho C^dag / tr(...); scale of C drops out."""
    c = as_matrix(c_op)
    m = as_matrix(rho)
    out = c @ m @ c.conj().T
    weight = float(np.real(np.trace(out)))
    if weight <= POST_SELECTION_FLOOR:
        raise PostSelectionError(
            f"post-selection probability {weight:.3e} below floor; output undefined"
        )
    out = out / weight
    out = (out + out.conj().T) / 2
    return DensityMatrix(out, (c.shape[0],))


def run_pctc_signaling_leg(inst: PctcInstance, rho_in) -> DensityMatrix:
    """One visible-system traversal: build C and apply the renormalized map."""
    return pctc_map(pctc_operator(inst), rho_in)
