"""Frame-dependence experiments for CTC-assisted channels.

An entangled pair is shared between Alice and Bob. Alice encodes one bit in
her choice of measurement basis (z or x). Bob feeds his half, joined with a
fixed |z+> ancilla, through a discrimination channel and decodes the basis
from the flag he observes. What Bob's input *is* depends on the frame:

* proper frame: Alice's measurement happened, so Bob holds a definite pure
  state per run and the channel is applied member by member;
* improper frame: no collapse is available to Bob, so his input is the
  reduced density matrix of the pair, one single channel run.

Ordinary quantum channels give identical statistics either way; the
fixed-point CTC channel does not, and these experiments quantify that.
All tables are exact Born-weight accumulations unless a Monte Carlo shot
count is requested.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .circuits import FlagBasis, brun_circuit, four_state_alphabet
from .deutsch import DeutschInstance, cr_output, solve_fixed_points
from .linalg import kron, trace_distance
from .pctc import PctcInstance, run_pctc_signaling_leg
from .serialize import matrix_to_json
from .states import (
    DensityMatrix,
    Ensemble,
    MeasurementBasis,
    PureState,
    bell_singlet,
    proper_mixture,
    reduce,
    remote_collapse,
)

PROB_TOL = 1e-10


class FrameLabel(Enum):
    PROPER = "proper_frame"
    IMPROPER = "improper_frame"


class ChannelModel(Enum):
    DCTC = "dctc"
    PCTC = "pctc"
    LINEAR = "linear"


def _frame(value) -> FrameLabel:
    return value if isinstance(value, FrameLabel) else FrameLabel(str(value))


def _model(value) -> ChannelModel:
    return value if isinstance(value, ChannelModel) else ChannelModel(str(value))


@dataclass
class JointTable:
    """Joint probability table over Alice symbols (rows) and Bob outcomes (cols)."""

    row_labels: list
    col_labels: list
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.shape != (len(self.row_labels), len(self.col_labels)):
            raise ValueError("table shape does not match labels")
        if float(self.probs.min()) < -PROB_TOL:
            raise ValueError("joint table has a negative entry")
        self.probs = np.clip(self.probs, 0.0, None)
        total = float(self.probs.sum())
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"joint table sums to {total}, not 1")

    def to_dict(self) -> dict:
        return {
            "row_labels": list(self.row_labels),
            "col_labels": list(self.col_labels),
            "probs": self.probs.tolist(),
        }


def mutual_information(table) -> float:
    """Mutual information of a joint table, in bits; 0 log 0 terms vanish."""
    p = table.probs if isinstance(table, JointTable) else np.asarray(table, dtype=float)
    if float(p.min()) < -PROB_TOL or abs(float(p.sum()) - 1.0) > PROB_TOL:
        raise ValueError("mutual information needs a normalized nonnegative table")
    p = np.clip(p, 0.0, None)
    rows = p.sum(axis=1)
    cols = p.sum(axis=0)
    total = 0.0
    for i in range(p.shape[0]):
        for j in range(p.shape[1]):
            if p[i, j] > 0.0:
                total += p[i, j] * np.log2(p[i, j] / (rows[i] * cols[j]))
    return float(total)


@dataclass
class SignalingReport:
    frame: FrameLabel
    model: ChannelModel
    joint: JointTable
    mutual_information_bits: float
    per_symbol_success: list
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "experiment": "signaling",
            "frame": self.frame.value,
            "model": self.model.value,
            "joint": self.joint.to_dict(),
            "mutual_information_bits": self.mutual_information_bits,
            "per_symbol_success": list(self.per_symbol_success),
            "notes": self.notes,
        }

    def to_row(self) -> dict:
        return {
            "experiment": "signaling",
            "frame": self.frame.value,
            "model": self.model.value,
            "mi_bits": _fmt(self.mutual_information_bits),
            "success_z": _fmt(self.per_symbol_success[0]),
            "success_x": _fmt(self.per_symbol_success[1]),
            "distance": "",
            "notes": self.notes,
        }


@dataclass
class PreparationEquivalenceReport:
    coin: str
    trace_distance_linear: float
    dctc_output_proper: DensityMatrix
    dctc_output_improper: DensityMatrix
    dctc_distance: float
    notes: str = ""

    @property
    def dctc_outputs(self) -> tuple:
        return (self.dctc_output_proper, self.dctc_output_improper)

    def to_dict(self) -> dict:
        return {
            "experiment": "preparation-equivalence",
            "coin": self.coin,
            "trace_distance_linear": self.trace_distance_linear,
            "dctc_output_proper": matrix_to_json(self.dctc_output_proper.matrix),
            "dctc_output_improper": matrix_to_json(self.dctc_output_improper.matrix),
            "dctc_distance": self.dctc_distance,
            "notes": self.notes,
        }

    def rows(self) -> list:
        return [
            {
                "experiment": "preparation-equivalence",
                "frame": "",
                "model": "linear",
                "mi_bits": "",
                "success_z": "",
                "success_x": "",
                "distance": _fmt(self.trace_distance_linear),
                "notes": f"coin={self.coin}",
            },
            {
                "experiment": "preparation-equivalence",
                "frame": "",
                "model": "dctc",
                "mi_bits": "",
                "success_z": "",
                "success_x": "",
                "distance": _fmt(self.dctc_distance),
                "notes": f"coin={self.coin}; {self.notes}".strip("; "),
            },
        ]


@dataclass
class DiscriminationReport:
    """Per-symbol outcome of running an alphabet through its discrimination circuit."""

    entries: list
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "experiment": "discriminate",
            "table": [dict(e) for e in self.entries],
            "notes": self.notes,
        }


@dataclass
class DecorrelationReport:
    improper_joint: DensityMatrix
    proper_joint: DensityMatrix
    distance: float
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "experiment": "decorrelation",
            "improper_joint": matrix_to_json(self.improper_joint.matrix),
            "proper_joint": matrix_to_json(self.proper_joint.matrix),
            "distance": self.distance,
            "notes": self.notes,
        }

    def rows(self) -> list:
        return [
            {
                "experiment": "decorrelation",
                "frame": "",
                "model": "dctc",
                "mi_bits": "",
                "success_z": "",
                "success_x": "",
                "distance": _fmt(self.distance),
                "notes": self.notes,
            }
        ]


def _fmt(x) -> str:
    return format(float(x), ".12g")


_Z_PLUS = np.array([1.0, 0.0], dtype=complex)
_SYMBOLS = ("z", "x")


def _discrimination_unitary() -> np.ndarray:
    alphabet, flags = four_state_alphabet()
    return brun_circuit(alphabet, flags)


def _flag_vectors() -> FlagBasis:
    _, flags = four_state_alphabet()
    return flags


def _channel_output(model: ChannelModel, unitary: np.ndarray, bob_input: np.ndarray) -> np.ndarray:
    if model is ChannelModel.LINEAR:
        return bob_input
    if model is ChannelModel.DCTC:
        inst = DeutschInstance(unitary, DensityMatrix(bob_input), (4, 4))
        report = solve_fixed_points(inst)
        return cr_output(inst, report.chosen.matrix).matrix
    inst = PctcInstance(unitary, (4, 4))
    return run_pctc_signaling_leg(inst, bob_input).matrix


def _flag_probabilities(rho: np.ndarray, flags: FlagBasis) -> np.ndarray:
    q = np.array([float(np.real(v.conj() @ rho @ v)) for v in flags.vectors])
    return np.clip(q, 0.0, None)


def _alice_branches(symbol: str) -> list:
    """Born branches (weight, bob conditional pure state) for Alice's basis choice."""
    basis = MeasurementBasis.z_basis() if symbol == "z" else MeasurementBasis.x_basis()
    amp = bell_singlet().amplitudes.reshape(2, 2)
    branches = []
    for label, proj in zip(basis.labels, basis.projectors):
        w, v = np.linalg.eigh(proj)
        avec = v[:, -1]
        cond = avec.conj() @ amp
        weight = float(np.real(np.vdot(cond, cond)))
        branches.append((label, weight, cond / np.sqrt(weight)))
    return branches


def _rail_density(bob_pure: np.ndarray) -> np.ndarray:
    rail = np.kron(bob_pure, _Z_PLUS)
    return np.outer(rail, rail.conj())


def _improper_rail() -> np.ndarray:
    bob_half = reduce(bell_singlet(), keep=1).matrix
    return kron(bob_half, np.outer(_Z_PLUS, _Z_PLUS.conj()))


def _decode_groups(q: np.ndarray) -> np.ndarray:
    """Collapse four flag probabilities to the decoded (z, x) bit."""
    return np.array([q[0] + q[1], q[2] + q[3]])


def signaling_experiment(
    frame, model, seed: int | None = None, monte_carlo: int = 0
) -> SignalingReport:
    """Run the basis-encoding protocol in one frame under one channel model.

    Exact mode accumulates Born weights (deterministic, seed unused); with
    ``monte_carlo=N`` the table is estimated from N sampled shots instead.
    """
    frame = _frame(frame)
    model = _model(model)
    unitary = _discrimination_unitary()
    flags = _flag_vectors()

    if monte_carlo > 0:
        table = _sample_table(frame, model, unitary, flags, seed, monte_carlo)
        notes = f"monte carlo, {monte_carlo} shots, seed {seed}"
    elif frame is FrameLabel.IMPROPER:
        out = _channel_output(model, unitary, _improper_rail())
        q = _decode_groups(_flag_probabilities(out, flags))
        q = q / q.sum()
        table = np.vstack([0.5 * q, 0.5 * q])  # product by construction
        notes = "exact; improper input is symbol-independent, table is a product"
    else:
        decoded = {}
        for symbol in _SYMBOLS:
            rows = []
            for _, weight, bob in _alice_branches(symbol):
                out = _channel_output(model, unitary, _rail_density(bob))
                rows.append(weight * _decode_groups(_flag_probabilities(out, flags)))
            total = np.sum(rows, axis=0)
            decoded[symbol] = total / total.sum()
        table = np.vstack([0.5 * decoded["z"], 0.5 * decoded["x"]])
        notes = "exact Born-weight accumulation"

    joint = JointTable(["z", "x"], ["z", "x"], table)
    mi = mutual_information(joint)
    success = []
    for i in range(2):
        row = joint.probs[i].sum()
        success.append(float(joint.probs[i, i] / row) if row > 0 else 0.0)
    return SignalingReport(frame, model, joint, mi, success, notes)


def _sample_table(
    frame: FrameLabel,
    model: ChannelModel,
    unitary: np.ndarray,
    flags: FlagBasis,
    seed: int | None,
    shots: int,
) -> np.ndarray:
    rng = np.random.default_rng(seed)
    counts = np.zeros((2, 2))
    singlet = bell_singlet()
    bases = {"z": MeasurementBasis.z_basis(), "x": MeasurementBasis.x_basis()}
    flag_dist: dict = {}
    if frame is FrameLabel.IMPROPER:
        out = _channel_output(model, unitary, _improper_rail())
        q = _flag_probabilities(out, flags)
        flag_dist["improper"] = q / q.sum()
    for _ in range(shots):
        symbol = _SYMBOLS[int(rng.integers(2))]
        if frame is FrameLabel.IMPROPER:
            q = flag_dist["improper"]
        else:
            label, bob = remote_collapse(singlet, bases[symbol], rng)
            key = (symbol, label)
            if key not in flag_dist:
                out = _channel_output(model, unitary, _rail_density(bob.amplitudes))
                q = _flag_probabilities(out, flags)
                flag_dist[key] = q / q.sum()
            q = flag_dist[key]
        flag = int(rng.choice(4, p=q))
        counts[_SYMBOLS.index(symbol), 0 if flag < 2 else 1] += 1
    return counts / shots


_COIN_VECTORS = {
    "z": (np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex)),
    "x": (
        np.array([1.0, 1.0], dtype=complex) / np.sqrt(2),
        np.array([1.0, -1.0], dtype=complex) / np.sqrt(2),
    ),
}


def preparation_equivalence(coin: str = "z", seed: int | None = None) -> PreparationEquivalenceReport:
    """Compare a coin-toss mixture against the improper reduction of a pair.

    The two preparations have the same density matrix, so any linear channel
    treats them identically (distance reported as trace_distance_linear).
    The fixed-point CTC channel is applied as each preparation dictates: per
    member for the coin toss, one collective run for the improper state;
    the two treatments separate for either coin basis.
    """
    if coin not in _COIN_VECTORS:
        raise ValueError(f"unknown coin basis {coin!r}")
    a, b = _COIN_VECTORS[coin]
    mixture = proper_mixture(
        Ensemble([(0.5, PureState(a, (2,))), (0.5, PureState(b, (2,)))])
    )
    improper = reduce(bell_singlet(), keep=1)
    linear_distance = trace_distance(mixture.matrix, improper.matrix)

    unitary = _discrimination_unitary()
    member_outputs = []
    for member in (a, b):
        out = _channel_output(ChannelModel.DCTC, unitary, _rail_density(member))
        member_outputs.append(out)
    proper_out = 0.5 * member_outputs[0] + 0.5 * member_outputs[1]
    improper_out = _channel_output(
        ChannelModel.DCTC, unitary, kron(improper.matrix, np.outer(_Z_PLUS, _Z_PLUS.conj()))
    )
    notes = "per-member channel runs vs one collective run on the same matrix"
    return PreparationEquivalenceReport(
        coin=coin,
        trace_distance_linear=float(linear_distance),
        dctc_output_proper=DensityMatrix(proper_out, (2, 2), "proper"),
        dctc_output_improper=DensityMatrix(improper_out, (2, 2), "improper"),
        dctc_distance=float(trace_distance(proper_out, improper_out)),
        notes=notes,
    )


def discrimination_table(
    alphabet=None, flags=None, residual_tol: float | None = None
) -> DiscriminationReport:
    """Feed each alphabet member through its discrimination circuit.

    Reports, per symbol, the probability of reading the matching flag on the
    visible output and the dimension of the fixed space (dimension 1 means
    the loop state was forced; larger values mean the max-entropy selection
    had freedom, which is how degenerate alphabets announce themselves).
    """
    if alphabet is None and flags is None:
        alphabet, flags = four_state_alphabet()
    if alphabet is None or flags is None:
        raise ValueError("provide both alphabet and flags, or neither")
    circuit = brun_circuit(alphabet, flags)
    dim = flags.dim
    solve_kwargs = {} if residual_tol is None else {"residual_tol": residual_tol}
    entries = []
    for s, member in enumerate(alphabet.states):
        inst = DeutschInstance(circuit, member.density(), (dim, dim))
        report = solve_fixed_points(inst, **solve_kwargs)
        out = cr_output(inst, report.chosen.matrix).matrix
        u = flags.vectors[s]
        entries.append({
            "symbol": s,
            "success": float(np.real(u.conj() @ out @ u)),
            "fixed_space_dim": report.fixed_space_dim,
        })
    duplicates = []
    for i in range(len(alphabet)):
        for j in range(i + 1, len(alphabet)):
            overlap = abs(np.vdot(alphabet.states[i].amplitudes, alphabet.states[j].amplitudes))
            if overlap >= 1.0 - 1e-12:
                duplicates.append((i, j))
    notes = "; ".join(
        f"symbols {i} and {j} are identical states, no channel separates them"
        for i, j in duplicates
    )
    return DiscriminationReport(entries, notes)


def decorrelation_comparison() -> DecorrelationReport:
    """Joint Alice-Bob state after the channel, with and without collapse.

    In the proper frame Alice's z outcome stays classically correlated with
    Bob's flag; in the improper frame the joint is the product of marginals.
    Bob's marginal alone cannot distinguish the frames here; the joint can.
    """
    unitary = _discrimination_unitary()
    proper = np.zeros((8, 8), dtype=complex)
    for label, weight, bob in _alice_branches("z"):
        basis = MeasurementBasis.z_basis()
        proj = basis.projectors[basis.labels.index(label)]
        out = _channel_output(ChannelModel.DCTC, unitary, _rail_density(bob))
        proper += weight * kron(proj, out)
    alice_marginal = reduce(bell_singlet(), keep=0).matrix
    improper_out = _channel_output(ChannelModel.DCTC, unitary, _improper_rail())
    improper = kron(alice_marginal, improper_out)
    return DecorrelationReport(
        improper_joint=DensityMatrix(improper, (2, 4), "improper"),
        proper_joint=DensityMatrix(proper, (2, 4), "proper"),
        distance=float(trace_distance(proper, improper)),
        notes="Alice measures z; Bob marginals agree, joints differ",
    )


def emit_report(reports: list, fmt: str = "json") -> str:
    """Render experiment reports as json, csv, or markdown text."""
    if fmt == "json":
        return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(
            buf,
            fieldnames=[
                "experiment", "frame", "model", "mi_bits",
                "success_z", "success_x", "distance", "notes",
            ],
        )
        writer.writeheader()
        for r in reports:
            rows = r.rows() if hasattr(r, "rows") else [r.to_row()]
            for row in rows:
                writer.writerow(row)
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["# Experiment reports", ""]
        for r in reports:
            lines.extend(_markdown_section(r))
        return "\n".join(lines)
    raise ValueError(f"unsupported format {fmt!r}")


def _markdown_table(joint: JointTable) -> list:
    header = "| symbol \\ decoded | " + " | ".join(joint.col_labels) + " |"
    rule = "|" + "---|" * (len(joint.col_labels) + 1)
    lines = [header, rule]
    for label, row in zip(joint.row_labels, joint.probs):
        lines.append("| " + label + " | " + " | ".join(_fmt(x) for x in row) + " |")
    return lines


def _markdown_section(r) -> list:
    if isinstance(r, SignalingReport):
        return [
            f"## signaling: {r.frame.value} / {r.model.value}",
            "",
            f"- mutual information: {_fmt(r.mutual_information_bits)} bits",
            f"- per-symbol success: z={_fmt(r.per_symbol_success[0])}, "
            f"x={_fmt(r.per_symbol_success[1])}",
            f"- notes: {r.notes}",
            "",
            *_markdown_table(r.joint),
            "",
        ]
    if isinstance(r, PreparationEquivalenceReport):
        return [
            f"## preparation equivalence (coin = {r.coin})",
            "",
            "| model | distance |",
            "|---|---|",
            f"| linear | {_fmt(r.trace_distance_linear)} |",
            f"| dctc | {_fmt(r.dctc_distance)} |",
            "",
            f"- notes: {r.notes}",
            "",
        ]
    if isinstance(r, DecorrelationReport):
        return [
            "## decorrelation",
            "",
            f"- joint-state distance (proper vs improper): {_fmt(r.distance)}",
            f"- notes: {r.notes}",
            "",
        ]
    raise ValueError(f"cannot render report of type {type(r).__name__}")
