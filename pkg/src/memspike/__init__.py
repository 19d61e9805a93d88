"""Single-memristor spiking sequential logic: device model, gates, calibration."""

from ._validation import InvalidInputError
from .adder import (
    AdderOutput,
    FullAdderRule,
    OrderCells,
    RangeTable,
    build_order_cells,
    classify_negative,
    classify_positive,
    decode_full_adder,
    decode_input_order,
)
from .calibration import (
    CalibrationProblem,
    Constraint,
    FreeParam,
    Interval,
    PatternSearchCalibrator,
    build_paper_constraints,
    calibrate,
    loss,
    reference_problem,
)
from .device import (
    SEED_PARAMS,
    DeviceParams,
    DeviceState,
    MemristorDevice,
    SpikeRecord,
    VoltageSegment,
    apply_segment,
    is_null,
    null_state,
    relax,
    run_protocol,
    settle,
    transition_spike,
)
from .encoding import LogicKind, LogicScheme, Sense, ThresholdRule, decode_threshold, encode_bit, encode_word
from .io import RunConfig, export_waveform, read_waveform
from .profiles import get_profile, profile_names
from .rules import RuleCheck, run_rules_suite
from .sequencer import (
    ClockConfig,
    GateResult,
    GateSpec,
    SpikingGate,
    build_protocol,
    builtin_gate,
    or_readout,
    run_gate,
    truth_table,
)

__version__ = "0.1.0"

__all__ = [
    "AdderOutput",
    "CalibrationProblem",
    "ClockConfig",
    "Constraint",
    "DeviceParams",
    "DeviceState",
    "FreeParam",
    "FullAdderRule",
    "GateResult",
    "GateSpec",
    "Interval",
    "InvalidInputError",
    "LogicKind",
    "LogicScheme",
    "MemristorDevice",
    "OrderCells",
    "PatternSearchCalibrator",
    "RangeTable",
    "RuleCheck",
    "RunConfig",
    "SEED_PARAMS",
    "Sense",
    "SpikeRecord",
    "SpikingGate",
    "ThresholdRule",
    "VoltageSegment",
    "apply_segment",
    "build_order_cells",
    "build_paper_constraints",
    "build_protocol",
    "builtin_gate",
    "calibrate",
    "classify_negative",
    "classify_positive",
    "decode_full_adder",
    "decode_input_order",
    "decode_threshold",
    "encode_bit",
    "encode_word",
    "export_waveform",
    "get_profile",
    "is_null",
    "loss",
    "null_state",
    "or_readout",
    "reference_problem",
    "profile_names",
    "read_waveform",
    "relax",
    "run_gate",
    "run_protocol",
    "run_rules_suite",
    "settle",
    "transition_spike",
    "truth_table",
]
