"""Bit-to-voltage assignations and threshold decoding of current spikes."""

from dataclasses import dataclass
from enum import Enum

from ._validation import InvalidInputError, check_bit, check_bits, check_finite, check_positive
from .device import VoltageSegment

__all__ = [
    "LogicKind",
    "LogicScheme",
    "ThresholdRule",
    "Sense",
    "encode_bit",
    "encode_word",
    "decode_threshold",
    "window_slice",
]


class LogicKind(str, Enum):
    MAGNITUDE = "magnitude"
    POLARITY = "polarity"
    MIXED1 = "mixed1"
    MIXED2 = "mixed2"


# (sign, uses_high_magnitude) for bit 1 and bit 0
_LEVELS = {
    LogicKind.MAGNITUDE: ((+1, True), (+1, False)),
    LogicKind.POLARITY: ((+1, True), (-1, True)),
    LogicKind.MIXED1: ((+1, True), (-1, False)),
    LogicKind.MIXED2: ((-1, True), (+1, False)),
}


@dataclass(frozen=True)
class LogicScheme:
    """One of the four logic assignations.

    ``m_high`` is the high magnitude ``M`` and ``m_low`` the low magnitude
    ``m``; both are positive, the sign comes from ``kind``. Polarity logic
    uses ``m_high`` for both bits and ignores ``m_low``.
    """

    kind: LogicKind
    m_high: float = 0.5
    m_low: float = 0.001

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", LogicKind(self.kind))
        except ValueError:
            raise InvalidInputError(f"unknown logic kind {self.kind!r}") from None
        high = check_positive(self.m_high, "m_high")
        low = check_positive(self.m_low, "m_low")
        if not low < high:
            raise InvalidInputError(f"m_low ({low}) must be smaller than m_high ({high})")
        object.__setattr__(self, "m_high", high)
        object.__setattr__(self, "m_low", low)

    def level(self, bit):
        sign, high = _LEVELS[self.kind][0 if bit else 1]
        return sign * (self.m_high if high else self.m_low)

    def to_dict(self):
        return {"kind": self.kind.value, "m_high": self.m_high, "m_low": self.m_low}

    @classmethod
    def from_dict(cls, data):
        return cls(kind=data["kind"], m_high=data.get("m_high", 0.5), m_low=data.get("m_low", 0.001))


class Sense(str, Enum):
    POSITIVE = "positive-exceeds"
    NEGATIVE = "negative-exceeds"


def window_slice(window):
    if window is None:
        return slice(None)
    start, stop = window
    return slice(start, stop)


@dataclass(frozen=True)
class ThresholdRule:
    """Decode 1 when a current extremum strictly exceeds ``threshold``.

    ``window`` is a ``(start, stop)`` record-index range over the gate
    waveform (Python slice semantics, ``None`` for open ends). When it is
    ``None`` the gate's own response window is used.
    """

    threshold: float
    sense: Sense = Sense.POSITIVE
    window: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "threshold", check_positive(self.threshold, "threshold"))
        try:
            object.__setattr__(self, "sense", Sense(self.sense))
        except ValueError:
            raise InvalidInputError(f"unknown threshold sense {self.sense!r}") from None
        if self.window is not None:
            object.__setattr__(self, "window", tuple(self.window))

    def extremum(self, result):
        if self.window is None:
            return result.max_pos if self.sense is Sense.POSITIVE else result.min_neg
        max_pos, min_neg = result.extrema(self.window)
        return max_pos if self.sense is Sense.POSITIVE else min_neg

    def decode(self, result):
        return decode_threshold(self.extremum(result), self)

    def to_dict(self):
        return {
            "type": "threshold",
            "threshold": self.threshold,
            "sense": self.sense.value,
            "window": None if self.window is None else list(self.window),
        }


def encode_bit(scheme, bit):
    return scheme.level(check_bit(bit))


def encode_word(scheme, bits, step, inter_input_return=False, v_baseline=0.0):
    """One ``step``-long segment per bit, optionally with baseline returns
    in between. No trailing return is appended."""
    bits = check_bits(bits)
    step = check_positive(step, "step")
    segments = []
    for k, bit in enumerate(bits):
        if k and inter_input_return:
            segments.append(VoltageSegment(v_baseline, step))
        segments.append(VoltageSegment(scheme.level(bit), step))
    return segments


def decode_threshold(extremum, rule):
    extremum = check_finite(extremum, "extremum")
    if rule.sense is Sense.POSITIVE:
        return int(extremum > rule.threshold)
    return int(extremum < -rule.threshold)
