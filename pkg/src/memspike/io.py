"""Run configuration, waveform CSV export and JSON report helpers."""

from dataclasses import dataclass, field, replace
import csv
import io
import json
import math
from pathlib import Path

from . import profiles
from ._validation import InvalidInputError, check_bits
from .adder import FullAdderRule, OrderCells, RangeTable, build_order_cells
from .device import WAVEFORM_COLUMNS, DeviceParams, DeviceState, SpikeRecord, VoltageSegment
from .encoding import LogicScheme, ThresholdRule
from .sequencer import ClockConfig, GateSpec, SignRule, builtin_gate, truth_table

__all__ = [
    "RunConfig",
    "export_waveform",
    "read_waveform",
    "waveform_csv",
    "rule_from_dict",
    "gate_to_dict",
    "gate_from_dict",
    "dump_json",
    "calibration_profile",
    "load_profile",
]


def waveform_csv(waveform):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(WAVEFORM_COLUMNS)
    for rec in waveform:
        # str(float) is the shortest round-tripping decimal
        writer.writerow([repr(float(x)) for x in rec.as_row()])
    return buf.getvalue()


def export_waveform(waveform, path):
    """Write spike records to ``path`` as CSV (amperes, volts, seconds)."""
    Path(path).write_text(waveform_csv(waveform), encoding="utf-8")


def read_waveform(path):
    """Re-import a waveform CSV as a list of :class:`SpikeRecord`.

    ``q_before``/``d_before`` are not stored and come back as NaN.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != WAVEFORM_COLUMNS:
            raise InvalidInputError(f"unexpected waveform header {header!r}")
        out = []
        for row in reader:
            t, v, dv, i, _, _ = (float(x) for x in row)
            out.append(SpikeRecord(t, v, dv, i, math.nan, math.nan))
        return out


def dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


def rule_from_dict(data):
    kind = data.get("type")
    if kind == "threshold":
        return ThresholdRule(data["threshold"], data.get("sense", "positive-exceeds"), data.get("window"))
    if kind == "sign":
        return SignRule()
    if kind == "full-adder":
        cells = data.get("order_cells")
        return FullAdderRule(
            table=RangeTable.from_dict(data.get("table", {})),
            flag_window=tuple(data.get("flag_window", (0, -3))),
            t2_index=data.get("t2_index", -3),
            order_cells=None if cells is None else OrderCells.from_dict(cells),
        )
    raise InvalidInputError(f"unknown decode rule type {kind!r}")


def gate_to_dict(gate):
    return {
        "name": gate.name,
        "scheme": gate.scheme.to_dict(),
        "arity": gate.arity,
        "params": gate.params.to_dict(),
        "decode": {k: rule.to_dict() for k, rule in gate.decode.items()},
        "read_pulses": [list(p) for p in gate.read_pulses],
        "response_steps": gate.response_steps,
        "response_window": None if gate.response_window is None else list(gate.response_window),
        "primary": gate.primary,
    }


def gate_from_dict(data, params=None):
    """Build a custom :class:`GateSpec`. ``params`` overrides ``data["params"]``."""
    if params is None:
        params = DeviceParams.from_dict(data["params"]) if "params" in data else profiles.get_profile("seed")
    return GateSpec(
        name=data.get("name", "custom"),
        scheme=LogicScheme.from_dict(data["scheme"]),
        arity=data["arity"],
        params=params,
        decode={k: rule_from_dict(v) for k, v in data.get("decode", {}).items()},
        read_pulses=tuple(tuple(p) for p in data.get("read_pulses", ())),
        response_steps=data.get("response_steps"),
        response_window=data.get("response_window"),
        primary=data.get("primary"),
    )


def load_profile(name_or_path, gate_name=None):
    """A shipped profile name, or a JSON file holding either one parameter
    set or a calibration profile document."""
    path = Path(name_or_path)
    if path.suffix != ".json":
        return profiles.get_profile(name_or_path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidInputError(f"cannot read profile file {path}: {exc}") from None
    if "profiles" in data:
        key = "calibrated-and" if gate_name in ("and", "or-readout") else "calibrated"
        try:
            data = data["profiles"][key]
        except KeyError:
            raise InvalidInputError(f"profile file {path} has no {key!r} entry") from None
    return DeviceParams.from_dict(data)


_CONFIG_KEYS = {
    "params", "profile", "scheme", "clock", "gate", "inputs", "all",
    "range_table", "segments", "initial", "outputs",
}


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI invocation needs, loadable from JSON.

    ``gate`` is a built-in name or a custom gate dict. For gate runs give
    either ``inputs`` or ``all=True``; ``segments`` drive ``simulate``.
    """

    params: DeviceParams | None = None
    profile: str | None = None
    scheme: LogicScheme | None = None
    clock: ClockConfig = ClockConfig()
    gate: object = None
    inputs: tuple | None = None
    all: bool = False
    range_table: RangeTable | None = None
    segments: tuple = ()
    initial: DeviceState | None = None
    outputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.params is not None and self.profile is not None:
            raise InvalidInputError("give either params or profile, not both")
        if self.profile is not None:
            load_profile(self.profile, self.gate_name)
        if self.inputs is not None:
            if self.all:
                raise InvalidInputError("give either inputs or all, not both")
            object.__setattr__(self, "inputs", check_bits(self.inputs))
        object.__setattr__(self, "segments", tuple(self.segments))
        if isinstance(self.gate, str) and self.gate not in _builtin_names():
            raise InvalidInputError(f"unknown gate {self.gate!r}")

    @property
    def gate_name(self):
        if isinstance(self.gate, dict):
            return self.gate.get("name", "custom")
        return self.gate

    def device_params(self, default="seed"):
        if self.params is not None:
            return self.params
        return load_profile(self.profile or default, self.gate_name)

    def build_gate(self):
        if self.gate is None:
            raise InvalidInputError("no gate given")
        explicit = self.params if self.profile is None else self.device_params()
        if isinstance(self.gate, dict):
            gate = gate_from_dict(self.gate, explicit)
        else:
            gate = builtin_gate(self.gate, explicit)
        if self.scheme is not None:
            gate = replace(gate, scheme=self.scheme)
        if self.range_table is not None:
            gate = replace(
                gate,
                decode={
                    k: replace(r, table=self.range_table) if isinstance(r, FullAdderRule) else r
                    for k, r in gate.decode.items()
                },
            )
        return gate

    def to_dict(self):
        return {
            "params": None if self.params is None else self.params.to_dict(),
            "profile": self.profile,
            "scheme": None if self.scheme is None else self.scheme.to_dict(),
            "clock": self.clock.to_dict(),
            "gate": self.gate,
            "inputs": None if self.inputs is None else list(self.inputs),
            "all": self.all,
            "range_table": None if self.range_table is None else self.range_table.to_dict(),
            "segments": [[s.level, s.duration] for s in self.segments],
            "initial": None if self.initial is None else _state_dict(self.initial),
            "outputs": dict(self.outputs),
        }

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise InvalidInputError("config must be a JSON object")
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise InvalidInputError(f"unknown config key(s): {sorted(unknown)}")
        try:
            return cls(
                params=None if data.get("params") is None else DeviceParams.from_dict(data["params"]),
                profile=data.get("profile"),
                scheme=None if data.get("scheme") is None else LogicScheme.from_dict(data["scheme"]),
                clock=ClockConfig.from_dict(data.get("clock") or {}),
                gate=data.get("gate"),
                inputs=None if data.get("inputs") is None else tuple(data["inputs"]),
                all=bool(data.get("all", False)),
                range_table=(
                    None if data.get("range_table") is None else RangeTable.from_dict(data["range_table"])
                ),
                segments=tuple(VoltageSegment(float(lv), float(dt)) for lv, dt in data.get("segments", ())),
                initial=None if data.get("initial") is None else DeviceState(**data["initial"]),
                outputs=dict(data.get("outputs") or {}),
            )
        except (TypeError, KeyError) as exc:
            raise InvalidInputError(f"malformed config: {exc}") from None

    @classmethod
    def load(cls, path):
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InvalidInputError(f"cannot read config {path}: {exc}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"config {path} is not valid JSON: {exc}") from None
        return cls.from_dict(data)


def _state_dict(state):
    return {"v_prev": state.v_prev, "q": state.q, "d": state.d, "t_now": state.t_now}


def _builtin_names():
    from .sequencer import BUILTIN_GATES

    return BUILTIN_GATES


def calibration_profile(result, clock=ClockConfig(), resolution=0.1e-9):
    """Profile document for a finished calibration: both parameter sets
    plus the t_2 order cells measured under the calibrated adder."""
    clock = replace(clock, inter_input_return=result.inter_input_return)
    adder = builtin_gate("full-adder", result.params["adder"])
    rows = truth_table(replace(adder, decode={}), clock)
    cells = build_order_cells({res.inputs: res.t2 for res in rows}, resolution)
    return {
        "format": 1,
        "profiles": {
            "calibrated": result.params["adder"].to_dict(),
            "calibrated-and": result.params["and"].to_dict(),
        },
        "inter_input_return": result.inter_input_return,
        "residual": result.residual,
        "order_cells": cells.to_dict(),
    }
