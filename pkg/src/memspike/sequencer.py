"""Timed gate protocols and truth-table execution.

A gate run applies the encoded inputs one clock step each, returns to
baseline at t_1, optionally applies read pulses, and decodes the spike
extrema found in its response window.
"""

from dataclasses import dataclass, field, replace
import itertools

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import profiles
from ._validation import (
    InvalidInputError,
    check_bit_matrix,
    check_bits,
    check_finite,
    check_non_negative,
    check_positive,
)
from .adder import AdderOutput, FullAdderRule
from .device import DeviceParams, VoltageSegment, is_null, run_protocol, settle
from .encoding import LogicKind, LogicScheme, Sense, ThresholdRule, encode_word, window_slice

__all__ = [
    "ClockConfig",
    "GateSpec",
    "GateResult",
    "SignRule",
    "build_protocol",
    "run_gate",
    "truth_table",
    "or_readout",
    "builtin_gate",
    "BUILTIN_GATES",
    "reference_output",
    "SpikingGate",
]

AND_THRESHOLD = 0.55e-6
FULL_ADDER_READ_LEVEL = -0.15
RESPONSE_SPAN = 4


@dataclass(frozen=True)
class ClockConfig:
    step: float = 1.0
    zero_wait: float | None = None
    inter_input_return: bool = False

    def __post_init__(self):
        object.__setattr__(self, "step", check_positive(self.step, "step"))
        if self.zero_wait is None:
            object.__setattr__(self, "zero_wait", 40 * self.step)
        object.__setattr__(self, "zero_wait", check_non_negative(self.zero_wait, "zero_wait"))
        object.__setattr__(self, "inter_input_return", bool(self.inter_input_return))

    def to_dict(self):
        return {
            "step": self.step,
            "zero_wait": self.zero_wait,
            "inter_input_return": self.inter_input_return,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass(frozen=True)
class SignRule:
    """Decode 1 when the t_1 response spike is strictly positive."""

    def decode(self, result):
        return int(result.waveform[result.t1_index].i_spike > 0)

    def to_dict(self):
        return {"type": "sign"}


@dataclass(frozen=True)
class GateSpec:
    """A timed single-device gate.

    ``read_pulses`` holds ``(offset, level)`` pairs, offsets counted in
    clock steps after the last input (offset 1 is the t_1 return, so read
    offsets start at 2). ``response_steps`` is the number of post-input
    steps; it defaults to one past the last read pulse. ``response_window``
    is a ``(start, stop)`` record range; ``None`` means t_1 through four
    steps after the last input.
    """

    name: str
    scheme: LogicScheme
    arity: int
    params: DeviceParams
    decode: dict = field(default_factory=dict)
    read_pulses: tuple = ()
    response_steps: int | None = None
    response_window: tuple | None = None
    primary: str | None = None

    def __post_init__(self):
        if int(self.arity) != self.arity or self.arity < 1:
            raise InvalidInputError(f"arity must be a positive integer, got {self.arity!r}")
        pulses = tuple((int(off), check_finite(lv, "read level")) for off, lv in self.read_pulses)
        offsets = [off for off, _ in pulses]
        if any(b <= a for a, b in zip(offsets, offsets[1:])):
            raise InvalidInputError("read pulse offsets must be strictly increasing")
        if offsets and offsets[0] < 2:
            raise InvalidInputError("read pulse offsets must be >= 2 (offset 1 is the t_1 return)")
        object.__setattr__(self, "read_pulses", pulses)
        steps = self.response_steps
        min_steps = offsets[-1] + 1 if offsets else 1
        if steps is None:
            steps = min_steps
        if steps < min_steps:
            raise InvalidInputError(f"response_steps must be >= {min_steps}")
        object.__setattr__(self, "response_steps", int(steps))
        if self.response_window is not None:
            object.__setattr__(self, "response_window", tuple(self.response_window))
        if self.primary is None and self.decode:
            object.__setattr__(self, "primary", next(iter(self.decode)))

    def with_params(self, params):
        return replace(self, params=params)


@dataclass
class GateResult:
    inputs: tuple
    waveform: list
    window: tuple
    t1_index: int
    max_pos: float
    min_neg: float
    decoded: dict
    final_state: object = None

    def extrema(self, window):
        currents = [rec.i_spike for rec in self.waveform[window_slice(window)]]
        return max([0.0, *currents]), min([0.0, *currents])

    @property
    def t2(self):
        return self.waveform[self.t1_index + 1].i_spike


def _input_records(gate, clock):
    return 2 * gate.arity - 1 if clock.inter_input_return else gate.arity


def build_protocol(gate, inputs, clock=ClockConfig()):
    bits = check_bits(inputs, gate.arity)
    baseline = gate.params.v_baseline
    segments = encode_word(gate.scheme, bits, clock.step, clock.inter_input_return, baseline)
    reads = dict(gate.read_pulses)
    for offset in range(1, gate.response_steps + 1):
        segments.append(VoltageSegment(reads.get(offset, baseline), clock.step))
    return segments


def _resolve_window(gate, clock, n_records):
    if gate.response_window is not None:
        start, stop, _ = slice(*gate.response_window).indices(n_records)
        return (start, stop)
    t1 = _input_records(gate, clock)
    return (t1, min(t1 + RESPONSE_SPAN, n_records))


def run_gate(gate, inputs, clock=ClockConfig()):
    """Run one gate evaluation from the null state and decode it."""
    bits = check_bits(inputs, gate.arity)
    waveform, final = run_protocol(gate.params, build_protocol(gate, bits, clock))
    return assemble_result(gate, clock, bits, waveform, final)


def assemble_result(gate, clock, bits, waveform, final, decode=True):
    """Window the waveform, take extrema and (optionally) decode."""
    window = _resolve_window(gate, clock, len(waveform))
    currents = [rec.i_spike for rec in waveform[window[0] : window[1]]]
    result = GateResult(
        inputs=bits,
        waveform=waveform,
        window=window,
        t1_index=_input_records(gate, clock),
        max_pos=max([0.0, *currents]),
        min_neg=min([0.0, *currents]),
        decoded={},
        final_state=final,
    )
    if decode:
        for name, rule in gate.decode.items():
            out = rule.decode(result)
            if isinstance(out, AdderOutput):
                result.decoded.update(out.to_dict())
            else:
                result.decoded[name] = out
    return result


def zeroed_after(result, gate, clock=ClockConfig(), eps=1e-9):
    rested = settle(result.final_state, gate.params, clock.zero_wait)
    return is_null(rested, eps, gate.params)


def truth_table(gate, clock=ClockConfig()):
    """All ``2**arity`` rows in lexicographic input order, each from null."""
    if gate.arity > 16:
        raise InvalidInputError("truth tables are limited to arity <= 16")
    return [run_gate(gate, bits, clock) for bits in itertools.product((0, 1), repeat=gate.arity)]


def or_readout(result, rule=ThresholdRule(AND_THRESHOLD, Sense.NEGATIVE, (0, None))):
    if rule.sense is not Sense.NEGATIVE:
        raise InvalidInputError("or_readout needs a negative-exceeds rule")
    return rule.decode(result)


_REFERENCE = {
    "not": lambda bits: {"out": 1 - bits[0]},
    "and": lambda bits: {"and": int(all(bits)), "or": int(any(bits))},
    "or-readout": lambda bits: {"or": int(any(bits))},
    "full-adder": lambda bits: {
        "value": sum(bits),
        "sum": sum(bits) % 2,
        "carry": sum(bits) // 2,
        "has_one": sum(bits) >= 1,
        "has_zero": sum(bits) < len(bits),
        "carry_flag": sum(bits) >= 2,
    },
}


def reference_output(name, bits):
    """Boolean/arithmetic ground truth for a built-in gate."""
    try:
        return _REFERENCE[name](tuple(bits))
    except KeyError:
        raise InvalidInputError(f"no reference function for gate {name!r}") from None


def _mixed2():
    return LogicScheme(LogicKind.MIXED2, m_high=0.5, m_low=0.001)


def builtin_gate(name, params=None):
    """Construct a named gate (``not``, ``and``, ``or-readout``, ``full-adder``).

    ``params`` may be a :class:`DeviceParams` or a profile name; by default
    each gate uses its shipped calibrated profile.
    """
    if isinstance(params, str):
        params = profiles.get_profile(params)
    if name == "not":
        return GateSpec(
            name="not",
            scheme=LogicScheme(LogicKind.POLARITY, m_high=0.5),
            arity=1,
            params=params or profiles.get_profile("calibrated"),
            decode={"out": SignRule()},
        )
    if name == "and":
        return GateSpec(
            name="and",
            scheme=_mixed2(),
            arity=2,
            params=params or profiles.get_profile("calibrated-and"),
            decode={
                "and": ThresholdRule(AND_THRESHOLD, Sense.POSITIVE),
                "or": ThresholdRule(AND_THRESHOLD, Sense.NEGATIVE, (0, None)),
            },
        )
    if name == "or-readout":
        return GateSpec(
            name="or-readout",
            scheme=_mixed2(),
            arity=2,
            params=params or profiles.get_profile("calibrated-and"),
            decode={"or": ThresholdRule(AND_THRESHOLD, Sense.NEGATIVE)},
            response_window=(0, None),
        )
    if name == "full-adder":
        return GateSpec(
            name="full-adder",
            scheme=_mixed2(),
            arity=3,
            params=params or profiles.get_profile("calibrated"),
            decode={"adder": FullAdderRule(order_cells=profiles.get_order_cells())},
            read_pulses=((2, FULL_ADDER_READ_LEVEL),),
            response_steps=RESPONSE_SPAN,
            response_window=(0, None),
            primary="value",
        )
    raise InvalidInputError(f"unknown gate {name!r}; choose from {sorted(BUILTIN_GATES)}")


BUILTIN_GATES = ("not", "and", "or-readout", "full-adder")


class SpikingGate(TransformerMixin, BaseEstimator):
    """Estimator view of a gate.

    Rows of ``X`` are input bit vectors. ``transform`` returns the
    ``[max_pos, min_neg]`` extrema of each run, ``predict`` the gate's
    primary decoded output.

    Parameters
    ----------
    gate : str or GateSpec
        Built-in gate name or a custom spec.
    profile : str, DeviceParams or None
        Overrides the gate's device parameters.
    step, zero_wait, inter_input_return
        Clock configuration.
    """

    def __init__(self, gate="and", profile=None, step=1.0, zero_wait=None, inter_input_return=False):
        self.gate = gate
        self.profile = profile
        self.step = step
        self.zero_wait = zero_wait
        self.inter_input_return = inter_input_return

    def fit(self, X=None, y=None):
        if isinstance(self.gate, GateSpec):
            spec = self.gate
            if self.profile is not None:
                params = self.profile
                if isinstance(params, str):
                    params = profiles.get_profile(params)
                spec = spec.with_params(params)
        else:
            spec = builtin_gate(self.gate, self.profile)
        self.spec_ = spec
        self.clock_ = ClockConfig(self.step, self.zero_wait, self.inter_input_return)
        if X is not None:
            self.n_features_in_ = check_bit_matrix(X, spec.arity).shape[1]
        return self

    def _fitted(self):
        if not hasattr(self, "spec_"):
            self.fit()
        return self.spec_, self.clock_

    def run(self, inputs):
        spec, clock = self._fitted()
        return run_gate(spec, inputs, clock)

    def decode(self, X):
        spec, clock = self._fitted()
        rows = check_bit_matrix(X, spec.arity)
        return [run_gate(spec, tuple(row), clock).decoded for row in rows]

    def transform(self, X):
        spec, clock = self._fitted()
        rows = check_bit_matrix(X, spec.arity)
        out = np.empty((len(rows), 2))
        for k, row in enumerate(rows):
            res = run_gate(spec, tuple(row), clock)
            out[k] = res.max_pos, res.min_neg
        return out

    def predict(self, X):
        spec, _ = self._fitted()
        return np.array([d[spec.primary] for d in self.decode(X)])

    def truth_table(self):
        spec, clock = self._fitted()
        return truth_table(spec, clock)
