"""Seven-range current classifier for the single-device Full Adder.

Positive extremum -> numerical sum (0..3). Negative records -> presence
flags: a '1' was input, a carry occurred, a '0' was input. The t_2 read
spike additionally separates input orders that share a sum.
"""

from dataclasses import dataclass, field
import itertools

from ._validation import InvalidInputError, check_finite, check_positive
from .encoding import window_slice

__all__ = [
    "RangeTable",
    "NegativeFlags",
    "AdderOutput",
    "OrderCells",
    "FullAdderRule",
    "classify_positive",
    "classify_negative",
    "decode_full_adder",
    "build_order_cells",
    "decode_input_order",
    "minority_position",
]

NA = 1e-9

POSITIONS = ("pos-A", "pos-B", "pos-C")
UNIFORM = "uniform"
UNDECIDABLE = "undecidable"


@dataclass(frozen=True)
class RangeTable:
    """Current ranges in amperes.

    Every range is half-open toward larger magnitude: ``(-20, -17.5]``,
    ``(-17.5, -5]``, ``(-5, 0]`` nA on the negative side and ``[0, 5)``,
    ``[5, 9)``, ``[9, 12.3)``, ``(12.5, inf)`` nA on the positive side.
    The gap between 12.3 and 12.5 nA is split at ``val3_boundary``.
    """

    has_one_lo: float = -20 * NA
    carry_lo: float = -17.5 * NA
    zero_lo: float = -5 * NA
    val1_lo: float = 5 * NA
    val2_lo: float = 9 * NA
    val2_hi: float = 12.3 * NA
    val3_lo: float = 12.5 * NA
    val3_boundary: float = 12.4 * NA

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            object.__setattr__(self, name, check_finite(getattr(self, name), name))
        if not self.has_one_lo < self.carry_lo < self.zero_lo < 0:
            raise InvalidInputError("negative range boundaries must be strictly increasing and < 0")
        if not 0 < self.val1_lo < self.val2_lo < self.val2_hi <= self.val3_lo:
            raise InvalidInputError("positive range boundaries must be strictly increasing and > 0")
        if not self.val2_hi <= self.val3_boundary <= self.val3_lo:
            raise InvalidInputError("val3_boundary must lie between val2_hi and val3_lo")

    def to_dict(self):
        return {name: getattr(self, name) for name in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidInputError(f"unknown range table field(s): {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class NegativeFlags:
    has_one: bool = False
    carry_flag: bool = False
    has_zero: bool = False

    def __or__(self, other):
        return NegativeFlags(
            self.has_one or other.has_one,
            self.carry_flag or other.carry_flag,
            self.has_zero or other.has_zero,
        )


@dataclass(frozen=True)
class AdderOutput:
    value: int
    sum_bit: int
    carry_bit: int
    has_one: bool
    has_zero: bool
    carry_flag: bool
    consistent: bool
    order: str | None = None

    def to_dict(self):
        return {
            "value": self.value,
            "sum": self.sum_bit,
            "carry": self.carry_bit,
            "has_one": self.has_one,
            "has_zero": self.has_zero,
            "carry_flag": self.carry_flag,
            "consistent": self.consistent,
            "order": self.order,
        }


def classify_positive(max_pos, table=RangeTable()):
    max_pos = check_finite(max_pos, "max_pos")
    if max_pos < 0:
        raise InvalidInputError(f"max_pos must be >= 0, got {max_pos!r}")
    if max_pos < table.val1_lo:
        return 0
    if max_pos < table.val2_lo:
        return 1
    if max_pos < table.val3_boundary:
        return 2
    return 3


def classify_negative(values, table=RangeTable()):
    """Flags raised by any of ``values`` (a single current or an iterable).

    Positive entries are ignored; they belong to no negative range.
    """
    if isinstance(values, (int, float)):
        values = (values,)
    has_one = carry = zero = False
    for x in values:
        x = check_finite(x, "current")
        if table.has_one_lo < x <= table.carry_lo:
            has_one = True
        elif table.carry_lo < x <= table.zero_lo:
            carry = True
        elif table.zero_lo < x <= 0:
            zero = True
    return NegativeFlags(has_one, carry, zero)


@dataclass(frozen=True)
class OrderCells:
    """Calibrated t_2 cells per sum value: ``{value: ((lo, hi, label), ...)}``.

    ``resolution`` is the smallest t_2 difference the read-out is assumed
    to resolve; ``min_separation`` the smallest gap between reference
    values sharing a sum.
    """

    cells: dict = field(default_factory=dict)
    resolution: float = 0.1 * NA
    min_separation: float = 0.0

    def to_dict(self):
        return {
            "resolution_A": self.resolution,
            "min_separation_A": self.min_separation,
            "cells": {
                str(v): [[lo, hi, label] for lo, hi, label in cells]
                for v, cells in sorted(self.cells.items())
            },
        }

    @classmethod
    def from_dict(cls, data):
        cells = {
            int(v): tuple((float(lo), float(hi), str(label)) for lo, hi, label in rows)
            for v, rows in data["cells"].items()
        }
        return cls(cells, float(data["resolution_A"]), float(data["min_separation_A"]))


def minority_position(triple):
    """Position label of the bit that occurs once, or ``uniform``."""
    ones = sum(triple)
    if ones in (0, len(triple)):
        return UNIFORM
    minority = 1 if ones == 1 else 0
    return POSITIONS[triple.index(minority)]


def build_order_cells(t2_by_triple, resolution=0.1 * NA):
    """Cut the t_2 axis at midpoints between reference values of equal sum.

    ``t2_by_triple`` maps each 3-bit input tuple to its t_2 current.
    """
    resolution = check_positive(resolution, "resolution")
    cells = {}
    min_sep = float("inf")
    for value in (1, 2):
        refs = sorted(
            (t2, minority_position(triple))
            for triple, t2 in t2_by_triple.items()
            if sum(triple) == value
        )
        if len(refs) < 2:
            raise InvalidInputError(f"need at least two reference runs with sum {value}")
        xs = [x for x, _ in refs]
        gaps = [b - a for a, b in zip(xs, xs[1:])]
        min_sep = min(min_sep, *gaps)
        cuts = [(a + b) / 2 for a, b in zip(xs, xs[1:])]
        edges = [xs[0] - gaps[0] / 2, *cuts, xs[-1] + gaps[-1] / 2]
        cells[value] = tuple(
            (lo, hi, label) for (lo, hi), (_, label) in zip(zip(edges, edges[1:]), refs)
        )
    return OrderCells(cells=cells, resolution=resolution, min_separation=min_sep)


def decode_input_order(t2, value, cells):
    """Experimental: recover where the minority bit sat in the input sequence."""
    t2 = check_finite(t2, "t2")
    if value in (0, 3):
        return UNIFORM
    rows = cells.cells.get(value, ())
    for k, (lo, hi, label) in enumerate(rows):
        last = k == len(rows) - 1
        if lo <= t2 < hi or (last and t2 == hi):
            return label
    return UNDECIDABLE


@dataclass(frozen=True)
class FullAdderRule:
    """Decoder for the full-adder gate.

    The sum comes from the maximum positive spike over the response window.
    ``has_one`` and the carry flag are read from the records in
    ``flag_window`` (input spikes and the t_1 response; the read pulse and
    what follows are excluded), ``has_zero`` from the whole response window.
    ``t2_index`` is the record index of the read spike.
    """

    table: RangeTable = RangeTable()
    flag_window: tuple = (0, -3)
    t2_index: int = -3
    order_cells: OrderCells | None = None

    def decode(self, result):
        return decode_full_adder(result, self.table, self)

    def to_dict(self):
        return {
            "type": "full-adder",
            "table": self.table.to_dict(),
            "flag_window": list(self.flag_window),
            "t2_index": self.t2_index,
            "order_cells": None if self.order_cells is None else self.order_cells.to_dict(),
        }


def decode_full_adder(result, table=RangeTable(), rule=None):
    rule = FullAdderRule(table) if rule is None else rule
    value = classify_positive(result.max_pos, table)
    currents = [rec.i_spike for rec in result.waveform]
    flagged = classify_negative(currents[window_slice(rule.flag_window)], table)
    windowed = classify_negative(currents[window_slice(result.window)], table)
    carry_bit = value // 2
    order = None
    if rule.order_cells is not None:
        order = decode_input_order(currents[rule.t2_index], value, rule.order_cells)
    return AdderOutput(
        value=value,
        sum_bit=value % 2,
        carry_bit=carry_bit,
        has_one=flagged.has_one,
        has_zero=windowed.has_zero,
        carry_flag=flagged.carry_flag,
        consistent=flagged.carry_flag == bool(carry_bit),
        order=order,
    )


def all_triples():
    return list(itertools.product((0, 1), repeat=3))
