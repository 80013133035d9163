"""Estimator-style wrappers around the CTC channel maps.

Both channels follow the sklearn convention: constructor stores parameters
untouched, fit() validates and freezes the circuit, transform() maps a stack
of input density matrices to output density matrices, predict() returns the
index of the most likely computational flag on the visible output. This
makes the channels composable with sklearn tooling (clone, pipelines,
get_params / set_params round-trips).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .circuits import swap_operator
from .deutsch import DeutschInstance, cr_output, solve_fixed_points
from .linalg import DimensionSplit
from .pctc import PctcInstance, pctc_map, pctc_operator
from .states import DensityMatrix
from .validation import check_density_stack, check_unitary_matrix


class DeutschChannel(BaseEstimator, TransformerMixin):
    """Nonlinear channel defined by the self-consistent fixed point.

    With the default ``unitary=None`` a SWAP interaction is used, which makes
    the channel act as the identity on the visible system (the input is
    swapped onto the loop and the loop's fixed point, equal to the input,
    is swapped back out).
    """

    def __init__(self, unitary=None, dims: DimensionSplit = (2, 2),
                 kernel_tol: float = 1e-9, residual_tol: float = 1e-10):
        self.unitary = unitary
        self.dims = dims
        self.kernel_tol = kernel_tol
        self.residual_tol = residual_tol

    def fit(self, X=None, y=None):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 2 or min(dims) < 1:
            raise ValueError(f"dims must be two positive factors, got {self.dims}")
        if self.unitary is None:
            if dims[0] != dims[1]:
                raise ValueError("default SWAP interaction needs equal factor dimensions")
            unitary = swap_operator(dims[0])
        else:
            unitary = check_unitary_matrix(self.unitary)
        if unitary.shape[0] != dims[0] * dims[1]:
            raise ValueError(
                f"unitary dimension {unitary.shape[0]} does not match dims {dims}"
            )
        self.unitary_ = unitary
        self.dims_ = dims
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "unitary_"):
            raise RuntimeError("channel is not fitted")
        stack, single = check_density_stack(X)
        if stack.shape[1] != self.dims_[0]:
            raise ValueError(
                f"inputs have dimension {stack.shape[1]}, channel expects {self.dims_[0]}"
            )
        outs = np.empty_like(stack)
        reports = []
        for i, rho in enumerate(stack):
            inst = DeutschInstance(self.unitary_, DensityMatrix(rho), self.dims_)
            report = solve_fixed_points(
                inst, kernel_tol=self.kernel_tol, residual_tol=self.residual_tol
            )
            reports.append(report)
            outs[i] = cr_output(inst, report.chosen.matrix).matrix
        self.reports_ = reports
        return outs[0] if single else outs

    def predict(self, X) -> np.ndarray:
        out = self.transform(X)
        stack = out[np.newaxis] if out.ndim == 2 else out
        return np.argmax(np.real(np.einsum("nii->ni", stack)), axis=1)


class PostSelectedChannel(BaseEstimator, TransformerMixin):
    """Linear-up-to-normalization channel built from the loop trace of the circuit."""

    def __init__(self, unitary=None, dims: DimensionSplit = (2, 2)):
        self.unitary = unitary
        self.dims = dims

    def fit(self, X=None, y=None):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 2 or min(dims) < 1:
            raise ValueError(f"dims must be two positive factors, got {self.dims}")
        if self.unitary is None:
            if dims[0] != dims[1]:
                raise ValueError("default SWAP interaction needs equal factor dimensions")
            unitary = swap_operator(dims[0])
        else:
            unitary = check_unitary_matrix(self.unitary)
        if unitary.shape[0] != dims[0] * dims[1]:
            raise ValueError(
                f"unitary dimension {unitary.shape[0]} does not match dims {dims}"
            )
        self.unitary_ = unitary
        self.dims_ = dims
        self.operator_ = pctc_operator(PctcInstance(unitary, dims))
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "operator_"):
            raise RuntimeError("channel is not fitted")
        stack, single = check_density_stack(X)
        if stack.shape[1] != self.dims_[0]:
            raise ValueError(
                f"inputs have dimension {stack.shape[1]}, channel expects {self.dims_[0]}"
            )
        outs = np.empty_like(stack)
        weights = []
        for i, rho in enumerate(stack):
            raw = self.operator_ @ rho @ self.operator_.conj().T
            weights.append(float(np.real(np.trace(raw))))
            outs[i] = pctc_map(self.operator_, rho).matrix
        self.weights_ = np.array(weights)
        return outs[0] if single else outs

    def predict(self, X) -> np.ndarray:
        out = self.transform(X)
        stack = out[np.newaxis] if out.ndim == 2 else out
        return np.argmax(np.real(np.einsum("nii->ni", stack)), axis=1)
