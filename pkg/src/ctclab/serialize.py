"""JSON encodings for complex matrices and state vectors.

Matrices: {"rows": n, "cols": n, "re": [[...]], "im": [[...]]}
Vectors:  {"re": [...], "im": [...]}
"""

from __future__ import annotations

import numpy as np

from .linalg import as_matrix


def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": np.real(m).tolist(),
        "im": np.imag(m).tolist(),
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from exc
    if re.shape != (rows, cols) or im.shape != (rows, cols):
        raise ValueError(f"matrix entries do not match declared shape {rows}x{cols}")
    return re + 1j * im


def state_to_json(v) -> dict:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return {"re": np.real(v).tolist(), "im": np.imag(v).tolist()}


def state_from_json(obj: dict) -> np.ndarray:
    try:
        re = np.asarray(obj["re"], dtype=float).reshape(-1)
        im = np.asarray(obj["im"], dtype=float).reshape(-1)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed state object: {exc}") from exc
    if re.shape != im.shape:
        raise ValueError("state re/im parts differ in length")
    return re + 1j * im
