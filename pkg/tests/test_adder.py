import pytest
from hypothesis import given, strategies as st

from memspike import (
    FullAdderRule,
    InvalidInputError,
    RangeTable,
    SpikeRecord,
    build_order_cells,
    builtin_gate,
    classify_negative,
    classify_positive,
    decode_full_adder,
    decode_input_order,
    truth_table,
)
from memspike.adder import OrderCells, all_triples, minority_position
from memspike.sequencer import GateResult

NA = 1e-9


@pytest.mark.parametrize(
    "na,value", [(0, 0), (4.99, 0), (5, 1), (7, 1), (9, 2), (12.3, 2), (12.39, 2), (12.4, 3), (13, 3), (1e3, 3)]
)
def test_classify_positive(na, value):
    assert classify_positive(na * NA) == value


def test_classify_positive_custom_boundary():
    assert classify_positive(12.35 * NA, RangeTable(val3_boundary=12.3 * NA)) == 3
    with pytest.raises(InvalidInputError):
        classify_positive(-1 * NA)


@pytest.mark.parametrize(
    "na,flags",
    [(-18, (True, False, False)), (-10, (False, True, False)), (-2, (False, False, True)),
     (-17.5, (True, False, False)), (-5, (False, True, False)), (0, (False, False, True)),
     (-20, (False, False, False)), (-25, (False, False, False))],
)
def test_classify_negative(na, flags):
    f = classify_negative(na * NA)
    assert (f.has_one, f.carry_flag, f.has_zero) == flags


def test_classify_negative_ors_records():
    f = classify_negative([-18 * NA, -10 * NA, 3 * NA])
    assert f.has_one and f.carry_flag and not f.has_zero


def test_range_table_validation():
    with pytest.raises(InvalidInputError):
        RangeTable(carry_lo=-25 * NA)
    with pytest.raises(InvalidInputError):
        RangeTable(val3_boundary=13 * NA)
    with pytest.raises(InvalidInputError):
        RangeTable.from_dict({"nope": 1.0})
    t = RangeTable(val3_boundary=12.45 * NA)
    assert RangeTable.from_dict(t.to_dict()) == t


def _result(currents):
    wf = [SpikeRecord(float(k), 0.0, 0.0, i, 0.0, 0.0) for k, i in enumerate(currents)]
    return GateResult((1, 1, 1), wf, (0, len(wf)), 3, max([0.0, *currents]), min([0.0, *currents]), {})


def test_decode_examples():
    # records: A, B, C, t_1, t_2, tail, tail
    out = decode_full_adder(_result([-19 * NA, -10 * NA, -1 * NA, 13 * NA, -3 * NA, 0.0, 0.0]))
    assert (out.value, out.sum_bit, out.carry_bit, out.has_one, out.carry_flag) == (3, 1, 1, True, True)
    assert out.consistent

    out = decode_full_adder(_result([-3 * NA, 0.1 * NA, 0.0, 2 * NA, -2 * NA, 0.0, 0.0]))
    assert (out.value, out.sum_bit, out.carry_bit, out.has_zero, out.has_one) == (0, 0, 0, True, False)

    out = decode_full_adder(_result([-18 * NA, -1 * NA, 0.0, 7 * NA, -2 * NA, 0.0, 0.0]))
    assert (out.value, out.sum_bit, out.carry_bit, out.has_one) == (1, 1, 0, True)


def test_inconsistent_decode_is_flagged_not_raised():
    out = decode_full_adder(_result([-18 * NA, 0.0, 0.0, 13 * NA, -2 * NA, 0.0, 0.0]))
    assert out.value == 3 and not out.carry_flag and not out.consistent


def test_read_spike_excluded_from_flags():
    out = decode_full_adder(_result([-2 * NA, 0.0, 0.0, 1 * NA, -6 * NA, 0.0, 0.0]))
    assert not out.carry_flag and out.has_zero


@given(st.floats(0, 1e-7), st.floats(0, 1e-7))
def test_classify_positive_monotone(a, b):
    lo, hi = sorted((a, b))
    assert classify_positive(lo) <= classify_positive(hi)


def test_minority_position():
    assert minority_position((1, 1, 1)) == minority_position((0, 0, 0)) == "uniform"
    assert minority_position((1, 0, 0)) == "pos-A"
    assert minority_position((1, 0, 1)) == "pos-B"
    assert minority_position((1, 1, 0)) == "pos-C"


def _t2_map(profile):
    gate = builtin_gate("full-adder", profile)
    return {r.inputs: r.t2 for r in truth_table(gate)}


def test_seed_t2_separates_order():
    t2 = _t2_map("seed")
    assert t2[(1, 0, 0)] != t2[(0, 0, 1)]
    cells = build_order_cells(t2)
    a = decode_input_order(t2[(1, 0, 0)], 1, cells)
    c = decode_input_order(t2[(0, 0, 1)], 1, cells)
    assert (a, c) == ("pos-A", "pos-C")


def test_order_cells_recover_every_triple():
    t2 = _t2_map("calibrated")
    cells = build_order_cells(t2)
    for triple, value in t2.items():
        assert decode_input_order(value, sum(triple), cells) == minority_position(triple)
    assert OrderCells.from_dict(cells.to_dict()) == cells


def test_decode_input_order_edges():
    cells = build_order_cells({(1, 0, 0): 1.0, (0, 1, 0): 2.0, (0, 0, 1): 3.0,
                               (0, 1, 1): 1.0, (1, 0, 1): 2.0, (1, 1, 0): 3.0})
    assert decode_input_order(2.0, 3, cells) == "uniform"
    assert decode_input_order(0.0, 0, cells) == "uniform"
    assert decode_input_order(100.0, 1, cells) == "undecidable"
    assert decode_input_order(3.5, 1, cells) == "pos-C"
    assert cells.min_separation == 1.0
    with pytest.raises(InvalidInputError):
        build_order_cells({(1, 0, 0): 1.0})


def test_shipped_rule_reports_order():
    for res in truth_table(builtin_gate("full-adder")):
        assert res.decoded["order"] == minority_position(res.inputs)


def test_all_triples():
    assert len(all_triples()) == 8 and all_triples()[0] == (0, 0, 0)
    assert FullAdderRule().flag_window == (0, -3)
