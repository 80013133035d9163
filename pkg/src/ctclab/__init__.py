"""Fixed-point closed-timelike-curve channels and frame-dependence experiments.

The package has three layers: small dense linear algebra and state
bookkeeping (`linalg`, `states`, `serialize`), the channel constructions
(`deutsch`, `circuits`, `pctc`), and the protocol layer (`experiments`,
`channels`, `cli`).
"""

from .channels import DeutschChannel, PostSelectedChannel
from .circuits import (
    Alphabet,
    FlagBasis,
    brun_circuit,
    completion_unitary,
    controlled_u,
    four_state_alphabet,
    swap_operator,
)
from .deutsch import (
    DeutschInstance,
    FixedPointError,
    FixedPointReport,
    cr_output,
    deutsch_map,
    evolve,
    iterate_fixed_point,
    solve_fixed_points,
    superoperator,
)
from .experiments import (
    ChannelModel,
    DecorrelationReport,
    DiscriminationReport,
    FrameLabel,
    JointTable,
    PreparationEquivalenceReport,
    SignalingReport,
    decorrelation_comparison,
    discrimination_table,
    emit_report,
    mutual_information,
    preparation_equivalence,
    signaling_experiment,
)
from .linalg import (
    CheckResult,
    dagger,
    entropy,
    is_density,
    is_unitary,
    kron,
    partial_trace,
    random_density,
    random_unitary,
    trace_distance,
    unvec,
    vec,
)
from .pctc import (
    PctcInstance,
    PostSelectionError,
    pctc_map,
    pctc_operator,
    run_pctc_signaling_leg,
)
from .serialize import matrix_from_json, matrix_to_json, state_from_json, state_to_json
from .states import (
    DensityMatrix,
    Ensemble,
    MeasurementBasis,
    MeasurementResult,
    PureState,
    bell_singlet,
    bloch_state,
    measure,
    proper_mixture,
    reduce,
    remote_collapse,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "ChannelModel",
    "CheckResult",
    "DecorrelationReport",
    "DensityMatrix",
    "DeutschChannel",
    "DeutschInstance",
    "DiscriminationReport",
    "Ensemble",
    "FixedPointError",
    "FixedPointReport",
    "FlagBasis",
    "FrameLabel",
    "JointTable",
    "MeasurementBasis",
    "MeasurementResult",
    "PctcInstance",
    "PostSelectedChannel",
    "PostSelectionError",
    "PreparationEquivalenceReport",
    "PureState",
    "SignalingReport",
    "bell_singlet",
    "bloch_state",
    "brun_circuit",
    "completion_unitary",
    "controlled_u",
    "cr_output",
    "dagger",
    "decorrelation_comparison",
    "deutsch_map",
    "discrimination_table",
    "emit_report",
    "entropy",
    "evolve",
    "four_state_alphabet",
    "is_density",
    "is_unitary",
    "iterate_fixed_point",
    "kron",
    "matrix_from_json",
    "matrix_to_json",
    "measure",
    "mutual_information",
    "partial_trace",
    "pctc_map",
    "pctc_operator",
    "preparation_equivalence",
    "proper_mixture",
    "random_density",
    "random_unitary",
    "reduce",
    "remote_collapse",
    "run_pctc_signaling_leg",
    "signaling_experiment",
    "solve_fixed_points",
    "state_from_json",
    "state_to_json",
    "superoperator",
    "swap_operator",
    "trace_distance",
    "unvec",
    "vec",
    "__version__",
]
