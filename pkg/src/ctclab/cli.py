"""Command-line entry point.

Five subcommands: ``fixed-point`` solves one loop instance, ``discriminate``
runs an alphabet through its discrimination circuit, ``signal`` runs the
two-frame signaling suite, ``equivalence`` compares the two preparations of
the same density matrix, ``pctc`` applies the post-selected channel.

Instances are configured with flags, with a JSON config file, or both
(flags win). Matrices use the schema {"rows": n, "cols": n, "re": [[..]],
"im": [[..]]}; state vectors use {"re": [..], "im": [..]}. Builtin names
cover the common circuits and states so everyday runs need no JSON at all.
Exit codes: 0 success, 2 invalid configuration, 3 solver or channel failure.
Set CTCLAB_LOG=DEBUG (or INFO, ...) for progress logging on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .circuits import Alphabet, FlagBasis, brun_circuit, four_state_alphabet, swap_operator
from .deutsch import DeutschInstance, FixedPointError, FixedPointReport, solve_fixed_points
from .experiments import (
    ChannelModel,
    FrameLabel,
    discrimination_table,
    emit_report,
    preparation_equivalence,
    signaling_experiment,
)
from .pctc import PctcInstance, PostSelectionError, pctc_map, pctc_operator
from .serialize import matrix_from_json, matrix_to_json, state_from_json
from .states import DensityMatrix, PureState
from .validation import check_density_matrix, check_unitary_matrix

logger = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_SOLVER = 3

_FORMATS = ("json", "csv", "markdown")


class ConfigError(ValueError):
    """Invalid run configuration; maps to exit code 2."""


def _fmt(x) -> str:
    return format(float(x), ".12g")


def _cfmt(z: complex) -> str:
    return f"{z.real:.9g}{z.imag:+.9g}j"


_SQ = 1.0 / math.sqrt(2.0)
_STATE_NAMES = {
    "z+": np.array([1.0, 0.0], dtype=complex),
    "z-": np.array([0.0, 1.0], dtype=complex),
    "x+": np.array([_SQ, _SQ], dtype=complex),
    "x-": np.array([_SQ, -_SQ], dtype=complex),
}
for _j, _member in enumerate(("z+", "z-", "x+", "x-")):
    _STATE_NAMES[f"xi{_j}"] = np.kron(_STATE_NAMES[_member], _STATE_NAMES["z+"])


def _builtin_unitary(name: str) -> np.ndarray:
    if name == "identity":
        return np.eye(4, dtype=complex)
    if name == "swap":
        return swap_operator(2)
    if name == "cnot":
        x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        return np.kron(np.diag([1.0, 0.0]).astype(complex), np.eye(2, dtype=complex)) \
            + np.kron(np.diag([0.0, 1.0]).astype(complex), x)
    if name == "brun4":
        return brun_circuit(*four_state_alphabet())
    raise ConfigError(f"unknown unitary name {name!r}")


def _read_json_file(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc


def _resolve_unitary(value) -> np.ndarray:
    if value is None:
        raise ConfigError("a unitary is required (builtin name, JSON file, or matrix object)")
    if isinstance(value, str):
        if value in ("identity", "swap", "cnot", "brun4"):
            return _builtin_unitary(value)
        if os.path.exists(value):
            value = _read_json_file(value)
        else:
            raise ConfigError(f"unknown unitary name {value!r}")
    if not isinstance(value, dict):
        raise ConfigError("unitary must be a builtin name or a matrix object")
    try:
        return check_unitary_matrix(matrix_from_json(value))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _resolve_density(value) -> np.ndarray:
    if value is None:
        raise ConfigError("an input state is required (builtin name, JSON file, or state object)")
    if isinstance(value, str):
        if value in _STATE_NAMES:
            v = _STATE_NAMES[value]
            return np.outer(v, v.conj())
        if os.path.exists(value):
            value = _read_json_file(value)
        else:
            raise ConfigError(f"unknown state name {value!r}")
    if not isinstance(value, dict):
        raise ConfigError("input must be a builtin name, a state object, or a matrix object")
    try:
        if "rows" in value:
            return check_density_matrix(matrix_from_json(value))
        v = state_from_json(value)
        norm = np.linalg.norm(v)
        if norm < 1e-12:
            raise ValueError("state vector has zero norm")
        v = v / norm
        return np.outer(v, v.conj())
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _resolve_alphabet(value) -> tuple:
    if value is None or value == "four-state":
        return four_state_alphabet()
    if isinstance(value, str):
        if os.path.exists(value):
            value = _read_json_file(value)
        else:
            raise ConfigError(f"unknown alphabet name {value!r}")
    if not isinstance(value, dict) or "states" not in value:
        raise ConfigError('alphabet must be "four-state" or an object with a "states" list')
    try:
        states = [state_from_json(s) for s in value["states"]]
        alphabet = Alphabet([PureState(s) for s in states])
        if "flags" in value:
            flags = FlagBasis([state_from_json(s) for s in value["flags"]])
        else:
            flags = FlagBasis.computational(alphabet.dim)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad alphabet: {exc}") from exc
    return alphabet, flags


_COMMON_KEYS = {"out", "format", "tol", "seed", "monte_carlo"}
_EXTRA_KEYS = {
    "fixed-point": {"unitary", "input"},
    "discriminate": {"alphabet"},
    "signal": set(),
    "equivalence": {"coin", "model"},
    "pctc": {"unitary", "input"},
}


def _effective_config(args: argparse.Namespace) -> dict:
    conf = {}
    if args.config is not None:
        conf = _read_json_file(args.config)
        if not isinstance(conf, dict):
            raise ConfigError("config file must hold a JSON object")
        allowed = _COMMON_KEYS | _EXTRA_KEYS[args.command]
        for key in conf:
            if key not in allowed:
                raise ConfigError(f"unknown config key: {key!r}")

    def pick(flag_value, key, default=None):
        return flag_value if flag_value is not None else conf.get(key, default)

    cfg = {
        "out": pick(args.out, "out"),
        "format": pick(args.fmt, "format", "json"),
        "tol": pick(args.tol, "tol"),
        "seed": pick(args.seed, "seed"),
        "monte_carlo": pick(args.monte_carlo, "monte_carlo", 0),
    }
    if cfg["format"] not in _FORMATS:
        raise ConfigError(f"unknown format {cfg['format']!r}")
    if cfg["seed"] is not None:
        seed = int(cfg["seed"])
        if not 0 <= seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        cfg["seed"] = seed
    cfg["monte_carlo"] = int(cfg["monte_carlo"])
    if cfg["monte_carlo"] < 0:
        raise ConfigError("monte_carlo shot count cannot be negative")
    if cfg["tol"] is not None and not float(cfg["tol"]) > 0:
        raise ConfigError("tol must be positive")

    for key in _EXTRA_KEYS[args.command]:
        cfg[key] = pick(getattr(args, key.replace("-", "_"), None), key)
    return cfg


def _solve_kwargs(cfg: dict) -> dict:
    return {} if cfg["tol"] is None else {"residual_tol": float(cfg["tol"])}


def _matrix_markdown(m: np.ndarray) -> list:
    lines = ["|" + "---|" * m.shape[1]]
    body = ["| " + " | ".join(_cfmt(z) for z in row) + " |" for row in m]
    return [body[0], lines[0], *body[1:]] if len(body) > 1 else [body[0], lines[0]]


def _run_fixed_point(cfg: dict) -> str:
    unitary = _resolve_unitary(cfg["unitary"])
    rho = _resolve_density(cfg["input"])
    n, d_cr = unitary.shape[0], rho.shape[0]
    if n % d_cr:
        raise ConfigError(f"input dimension {d_cr} does not divide unitary dimension {n}")
    inst = DeutschInstance(unitary, DensityMatrix(rho), (d_cr, n // d_cr))
    logger.info("solving fixed point at split %s", inst.split)
    report = solve_fixed_points(inst, **_solve_kwargs(cfg))
    return _render_fixed_point(report, cfg["format"])


def _render_fixed_point(report: FixedPointReport, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True)
    if fmt == "csv":
        return (
            "fixed_space_dim,residual,entropy_bits,method,selection_rule\n"
            f"{report.fixed_space_dim},{_fmt(report.residual)},"
            f"{_fmt(report.entropy_bits)},{report.method},{report.selection_rule}"
        )
    lines = [
        "# Fixed-point report",
        "",
        f"- fixed_space_dim: {report.fixed_space_dim}",
        f"- residual: {_fmt(report.residual)}",
        f"- entropy_bits: {_fmt(report.entropy_bits)}",
        f"- method: {report.method}",
        f"- selection_rule: {report.selection_rule}",
        "",
        "## chosen loop state",
        "",
        *_matrix_markdown(report.chosen.matrix),
    ]
    return "\n".join(lines)


def _run_discriminate(cfg: dict) -> str:
    alphabet, flags = _resolve_alphabet(cfg["alphabet"])
    report = discrimination_table(alphabet, flags, residual_tol=cfg["tol"])
    fmt = cfg["format"]
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True)
    if fmt == "csv":
        lines = ["symbol,success,fixed_space_dim"]
        lines += [
            f"{e['symbol']},{_fmt(e['success'])},{e['fixed_space_dim']}"
            for e in report.entries
        ]
        return "\n".join(lines)
    lines = [
        "# Discrimination report",
        "",
        "| symbol | success | fixed_space_dim |",
        "|---|---|---|",
    ]
    lines += [
        f"| {e['symbol']} | {_fmt(e['success'])} | {e['fixed_space_dim']} |"
        for e in report.entries
    ]
    if report.notes:
        lines += ["", f"- notes: {report.notes}"]
    return "\n".join(lines)


_SIGNAL_RUNS = (
    (FrameLabel.PROPER, ChannelModel.DCTC),
    (FrameLabel.IMPROPER, ChannelModel.DCTC),
    (FrameLabel.PROPER, ChannelModel.PCTC),
    (FrameLabel.IMPROPER, ChannelModel.PCTC),
    (FrameLabel.PROPER, ChannelModel.LINEAR),
)


def _run_signal(cfg: dict) -> str:
    shots = cfg["monte_carlo"]
    if shots:
        child = np.random.SeedSequence(cfg["seed"]).generate_state(len(_SIGNAL_RUNS))
        seeds = [int(s) for s in child]
    else:
        seeds = [None] * len(_SIGNAL_RUNS)
    reports = []
    for (frame, model), run_seed in zip(_SIGNAL_RUNS, seeds):
        logger.info("signaling run %s / %s", frame.value, model.value)
        reports.append(signaling_experiment(frame, model, seed=run_seed, monte_carlo=shots))
    gap = abs(reports[0].mutual_information_bits - reports[1].mutual_information_bits)
    fmt = cfg["format"]
    if fmt == "json":
        doc = {"frame_gap_bits": gap, "reports": [r.to_dict() for r in reports]}
        return json.dumps(doc, indent=2, sort_keys=True)
    if fmt == "csv":
        return emit_report(reports, "csv").rstrip("\n")
    lines = [
        emit_report(reports, "markdown"),
        "## frame-inconsistency witness",
        "",
        f"- MI gap between frames under the fixed-point channel: {_fmt(gap)} bits",
    ]
    return "\n".join(lines)


def _run_equivalence(cfg: dict) -> str:
    coin = cfg["coin"] if cfg["coin"] is not None else "z"
    model = cfg["model"] if cfg["model"] is not None else "all"
    if model not in ("all", "linear", "dctc"):
        raise ConfigError(f"unknown model filter {model!r}")
    report = preparation_equivalence(coin=coin)
    fmt = cfg["format"]
    if fmt == "json":
        doc = report.to_dict()
        if model == "linear":
            doc = {k: doc[k] for k in ("experiment", "coin", "trace_distance_linear", "notes")}
        elif model == "dctc":
            doc = {k: v for k, v in doc.items() if k != "trace_distance_linear"}
        return json.dumps(doc, indent=2, sort_keys=True)
    rows = [r for r in report.rows() if model in ("all", r["model"])]
    if fmt == "csv":
        header = "experiment,frame,model,mi_bits,success_z,success_x,distance,notes"
        body = [
            ",".join((r["experiment"], "", r["model"], "", "", "", r["distance"],
                      '"%s"' % r["notes"] if "," in r["notes"] else r["notes"]))
            for r in rows
        ]
        return "\n".join([header, *body])
    lines = [
        f"# Preparation equivalence (coin = {report.coin})",
        "",
        "| model | distance |",
        "|---|---|",
    ]
    lines += [f"| {r['model']} | {r['distance']} |" for r in rows]
    lines += ["", f"- notes: {report.notes}"]
    return "\n".join(lines)


def _run_pctc(cfg: dict) -> str:
    unitary = _resolve_unitary(cfg["unitary"])
    rho = _resolve_density(cfg["input"])
    n, d_cr = unitary.shape[0], rho.shape[0]
    if n % d_cr:
        raise ConfigError(f"input dimension {d_cr} does not divide unitary dimension {n}")
    inst = PctcInstance(unitary, (d_cr, n // d_cr))
    c_op = pctc_operator(inst)
    raw = c_op @ rho @ c_op.conj().T
    weight = float(np.real(np.trace(raw)))
    out = pctc_map(c_op, DensityMatrix(rho))
    fmt = cfg["format"]
    if fmt == "json":
        doc = {
            "experiment": "pctc",
            "operator": matrix_to_json(c_op),
            "input": matrix_to_json(rho),
            "output": matrix_to_json(out.matrix),
            "post_selection_weight": weight,
        }
        return json.dumps(doc, indent=2, sort_keys=True)
    if fmt == "csv":
        return f"experiment,post_selection_weight\npctc,{_fmt(weight)}"
    lines = [
        "# Post-selected channel report",
        "",
        f"- post_selection_weight: {_fmt(weight)}",
        "",
        "## effective operator",
        "",
        *_matrix_markdown(c_op),
        "",
        "## output state",
        "",
        *_matrix_markdown(out.matrix),
    ]
    return "\n".join(lines)


_RUNNERS = {
    "fixed-point": _run_fixed_point,
    "discriminate": _run_discriminate,
    "signal": _run_signal,
    "equivalence": _run_equivalence,
    "pctc": _run_pctc,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctclab",
        description="Fixed-point CTC channel solver and frame-dependence experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file; flags override its keys")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", dest="fmt", choices=_FORMATS,
                       help="output format (default json)")
        p.add_argument("--tol", type=float, help="residual tolerance override")
        p.add_argument("--seed", type=int, help="RNG seed (Monte Carlo mode)")
        p.add_argument("--monte-carlo", dest="monte_carlo", type=int, metavar="N",
                       help="estimate tables from N sampled shots instead of exact weights")

    p = sub.add_parser("fixed-point", help="solve one loop instance")
    common(p)
    p.add_argument("--unitary", help="builtin name (identity|swap|cnot|brun4), JSON file, or inline schema")
    p.add_argument("--input", help="builtin state name (z+|z-|x+|x-|xi0..xi3), JSON file, or inline schema")

    p = sub.add_parser("discriminate", help="run an alphabet through its discrimination circuit")
    common(p)
    p.add_argument("--alphabet", help='builtin "four-state" (default) or JSON file')

    p = sub.add_parser("signal", help="two-frame signaling suite over all channel models")
    common(p)

    p = sub.add_parser("equivalence", help="proper vs improper preparation comparison")
    common(p)
    p.add_argument("--coin", choices=("z", "x"), help="coin ensemble basis (default z)")
    p.add_argument("--model", choices=("all", "linear", "dctc"), help="restrict the rows shown")

    p = sub.add_parser("pctc", help="apply the post-selected channel of a circuit")
    common(p)
    p.add_argument("--unitary", help="builtin name, JSON file, or inline schema")
    p.add_argument("--input", help="builtin state name, JSON file, or inline schema")

    return parser


def _init_logging() -> None:
    name = os.environ.get("CTCLAB_LOG", "WARNING").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _init_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = _effective_config(args)
        text = _RUNNERS[args.command](cfg)
    except ConfigError as exc:
        print(f"ctclab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"ctclab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FixedPointError, PostSelectionError) as exc:
        print(f"ctclab: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if not text.endswith("\n"):
        text += "\n"
    if cfg["out"]:
        try:
            Path(cfg["out"]).write_text(text)
        except OSError as exc:
            print(f"ctclab: cannot write {cfg['out']}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
