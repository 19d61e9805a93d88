"""Acceptance criteria 1-8, one PASS/FAIL line each."""

import itertools
import math
import time

import numpy as np
import pytest

from memspike import (
    DeviceState,
    builtin_gate,
    calibrate,
    get_profile,
    is_null,
    reference_problem,
    relax,
    settle,
    truth_table,
)
from memspike.adder import all_triples
from memspike.cli import run_command
from memspike.profiles import get_order_cells
from memspike.rules import random_params, run_rules_suite
from memspike.sequencer import BUILTIN_GATES, reference_output

from conftest import ACCEPTANCE_LINES
from reference import substep_relax


@pytest.fixture
def report(capsys):
    def emit(number, title, passed, detail):
        line = f"AC{number} {'PASS' if passed else 'FAIL'} {title}: {detail}"
        ACCEPTANCE_LINES[number] = line
        with capsys.disabled():
            print(f"\n{line}")
        assert passed, line

    return emit


def test_ac1_not_gate(report):
    t0 = time.perf_counter()
    param_sets = [get_profile("calibrated"), get_profile("seed"), *random_params(np.random.default_rng(1), 50)]
    rows = ok = 0
    for p in param_sets:
        for res in truth_table(builtin_gate("not", p)):
            rows += 1
            ok += res.decoded["out"] == 1 - res.inputs[0]
    dt = time.perf_counter() - t0
    shipped = [r.decoded["out"] for r in truth_table(builtin_gate("not"))]
    report(1, "NOT gate", ok == rows and shipped == [1, 0] and dt < 1.0,
           f"{ok}/{rows} rows over {len(param_sets)} parameter sets, shipped profile {shipped}, {dt:.3f} s")


def test_ac2_and_or(report):
    t0 = time.perf_counter()
    rows = truth_table(builtin_gate("and"))
    or_rows = truth_table(builtin_gate("or-readout"))
    dt = time.perf_counter() - t0
    and_ok = sum(r.decoded["and"] == int(all(r.inputs)) for r in rows)
    or_ok = sum(r.decoded["or"] == int(any(r.inputs)) for r in rows)
    readout_ok = sum(r.decoded["or"] == int(any(r.inputs)) for r in or_rows)
    passed = and_ok == or_ok == readout_ok == 4 and dt < 1.0
    report(2, "AND gate and OR readout", passed,
           f"AND {and_ok}/4, OR {or_ok}/4, or-readout gate {readout_ok}/4, {dt:.3f} s")


def test_ac3_full_adder(report):
    t0 = time.perf_counter()
    rows = truth_table(builtin_gate("full-adder"))
    dt = time.perf_counter() - t0
    counts = dict.fromkeys(("sum/carry", "has_one", "carry_flag", "has_zero"), 0)
    for r in rows:
        ref = reference_output("full-adder", r.inputs)
        d = r.decoded
        counts["sum/carry"] += (d["value"], d["sum"], d["carry"]) == (ref["value"], ref["sum"], ref["carry"])
        for key in ("has_one", "carry_flag", "has_zero"):
            counts[key] += d[key] == ref[key]
    passed = len(rows) == 8 and all(v == 8 for v in counts.values()) and dt < 1.0
    report(3, "Full Adder", passed, ", ".join(f"{k} {v}/8" for k, v in counts.items()) + f", {dt:.3f} s")


def test_ac4_range_matching(report):
    problem = reference_problem(budget=100_000, rng_seed=42)
    t0 = time.perf_counter()
    result = calibrate(problem)
    dt = time.perf_counter() - t0
    matches_shipped = (
        result.params["adder"] == get_profile("calibrated")
        and result.params["and"] == get_profile("calibrated-and")
    )
    rep = result.report
    passed = result.residual == 0.0 and result.n_evals <= 100_000 and dt < 60.0
    report(4, "range matching", passed,
           f"residual {result.residual!r}, {rep['n_satisfied']}/{rep['n_constraints']} constraints, "
           f"{result.n_evals} evaluations, {dt:.2f} s, shipped profile reproduced: {matches_shipped}")
    assert matches_shipped


def test_ac5_rule_suite(report):
    t0 = time.perf_counter()
    checks = run_rules_suite(rng_seed=0, n_draws=100)
    dt = time.perf_counter() - t0
    wanted = {"bounceback", "hold_monotonicity", "diminishing_returns", "alternation_decay", "directionality"}
    got = {c.name: c for c in checks}
    passed = wanted <= set(got) and all(c.passed for c in checks) and dt < 10.0
    report(5, "device rule suite", passed,
           ", ".join(f"{c.name} {'ok' if c.passed else 'FAILED'} ({c.cases})" for c in checks) + f", {dt:.2f} s")


def test_ac6_analytic(report):
    worst = 0.0
    cases = [("seed", 0.0, 0.18, -0.5, 1.0), ("seed", -0.28, 0.6, 0.0, 3.0),
             ("calibrated", 0.02, 0.3, -0.15, 1.0), ("calibrated-and", -0.3, 0.2, 0.5, 2.0)]
    for name, q0, d0, level, dt in cases:
        p = get_profile(name)
        s = relax(DeviceState(v_prev=level, q=q0, d=d0), p, level, dt)
        q_num, d_num = substep_relax(p, q0, d0, level, dt)
        worst = max(worst, abs(s.q - q_num) / abs(q_num), abs(s.d - d_num) / abs(d_num))
    zeroed = total = 0
    for name in BUILTIN_GATES:
        gate = builtin_gate(name)
        for row in truth_table(gate):
            total += 1
            zeroed += is_null(settle(row.final_state, gate.params, 40.0), 1e-9, gate.params)
    passed = worst <= 1e-12 and zeroed == total
    report(6, "analytic checks", passed,
           f"max relax relative error {worst:.2e}, settle(40 s) null after {zeroed}/{total} gate runs")


def _invoke_twice(tmp_path, argv, outputs):
    blobs = []
    for k in range(2):
        run_dir = tmp_path / f"run{k}"
        run_dir.mkdir()
        args = [a.replace("{dir}", str(run_dir)) for a in argv]
        code = run_command(args)
        blobs.append((code, [(run_dir / o).read_bytes() for o in outputs]))
    return blobs[0] == blobs[1] and blobs[0][0] == 0


def test_ac7_determinism(report, tmp_path):
    cfg = tmp_path / "sim.json"
    cfg.write_text('{"profile": "seed", "segments": [[-0.5, 1.0], [0.0, 1.0], [0.5, 2.0]]}')
    commands = {
        "simulate": (["simulate", "--config", str(cfg), "--out", "{dir}/w.csv"], ["w.csv"]),
        "gate": (["gate", "--name", "full-adder", "--input", "1", "--input", "0", "--input", "1",
                  "--out", "{dir}/g.json"], ["g.json"]),
        "truth-table": (["truth-table", "--name", "full-adder", "--out", "{dir}/tt"], ["tt.csv", "tt.json"]),
        "calibrate": (["calibrate", "--out", "{dir}/cal.json"], ["cal.json", "cal.profile.json"]),
        "rules-check": (["rules-check", "--seed", "0", "--out", "{dir}/rules.json"], ["rules.json"]),
    }
    same = {}
    for name, (argv, outs) in commands.items():
        base = tmp_path / name
        base.mkdir()
        same[name] = _invoke_twice(base, argv, outs)
    report(7, "determinism", all(same.values()),
           ", ".join(f"{k} {'identical' if v else 'DIFFERS'}" for k, v in same.items()))


def test_ac8_information_preservation(report):
    rows = truth_table(builtin_gate("full-adder"))
    cells = get_order_cells()
    keys = {r.inputs: (r.decoded["value"], r.t2) for r in rows}
    gaps = [abs(a[1] - b[1]) for (ta, a), (tb, b) in itertools.combinations(keys.items(), 2) if a[0] == b[0]]
    min_gap = min(gaps)
    injective = len(set(keys.values())) == len(all_triples())
    passed = injective and min_gap >= cells.resolution and math.isclose(min_gap, cells.min_separation)
    report(8, "information preservation", passed,
           f"8 distinct (value, t_2) pairs: {injective}, smallest same-value t_2 gap {min_gap * 1e9:.3f} nA "
           f"vs resolution {cells.resolution * 1e9:.1f} nA")
