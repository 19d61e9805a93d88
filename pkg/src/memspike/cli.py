"""``memspike`` command-line interface.

Exit codes: 0 success, 1 failed expectation / rule / I/O, 2 configuration error.
"""

import argparse
import csv
import io
import json
from pathlib import Path
import sys

from ._validation import InvalidInputError
from .calibration import CalibrationProblem, calibrate, reference_problem
from .device import SEED_PARAMS, WAVEFORM_COLUMNS, run_protocol
from .io import RunConfig, calibration_profile, dump_json, load_profile, waveform_csv
from .rules import run_rules_suite
from .sequencer import BUILTIN_GATES, reference_output, run_gate, truth_table

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class CommandFailed(Exception):
    """Runtime failure that maps to exit code 1."""


def build_parser():
    parser = argparse.ArgumentParser(prog="memspike", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="run configuration (JSON)")
        p.add_argument("--profile", help="profile name or parameter JSON file")
        p.add_argument("--out", help="output path")
        return p

    p = add("simulate", "run an explicit segment list and emit the waveform CSV")

    p = add("gate", "run one gate evaluation and emit a JSON report")
    p.add_argument("--name", choices=BUILTIN_GATES)
    p.add_argument("--input", action="append", type=int, dest="inputs", help="input bit (repeatable)")
    p.add_argument("--expect", help="primary value, or key=value[,key=value]")

    p = add("truth-table", "run every input row; CSV and JSON")
    p.add_argument("--name", choices=BUILTIN_GATES)
    p.add_argument("--expect", help="'reference' or comma-separated primary outputs")

    p = add("calibrate", "fit profiles to a constraint problem")
    p.add_argument("--seed", type=int, help="search RNG seed")
    p.add_argument("--budget", type=int, help="objective evaluation budget")
    p.add_argument("--expect", choices=("feasible",), help="fail unless residual reaches 0")

    p = add("rules-check", "run the qualitative device-rule suite")
    p.add_argument("--seed", type=int, default=0, help="RNG seed for parameter draws")
    return parser


def _load_config(args):
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    updates = cfg.to_dict()
    name = getattr(args, "name", None)
    if name:
        updates["gate"] = name
    if args.profile:
        updates["profile"] = args.profile
        updates["params"] = None
    inputs = getattr(args, "inputs", None)
    if inputs is not None:
        updates["inputs"] = inputs
        updates["all"] = False
    return RunConfig.from_dict(updates)


def _emit(text, path, stdout):
    if path is None:
        stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CommandFailed(f"cannot write {path}: {exc}") from None


def _gate_report(gate, clock, res):
    return {
        "gate": gate.name,
        "inputs": list(res.inputs),
        "params": gate.params.to_dict(),
        "scheme": gate.scheme.to_dict(),
        "clock": clock.to_dict(),
        "window": list(res.window),
        "max_pos_A": res.max_pos,
        "min_neg_A": res.min_neg,
        "t1_A": res.waveform[res.t1_index].i_spike,
        "decoded": res.decoded,
        "waveform": [dict(zip(WAVEFORM_COLUMNS, rec.as_row())) for rec in res.waveform],
    }


def _parse_value(text):
    low = text.strip().lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(low)
    except ValueError:
        return text.strip()


def _parse_expect(spec, primary):
    out = {}
    for part in spec.split(","):
        if "=" in part:
            k, v = part.split("=", 1)
            out[k.strip()] = _parse_value(v)
        else:
            out[primary] = _parse_value(part)
    return out


def cmd_simulate(args, stdout):
    cfg = _load_config(args)
    if not cfg.segments:
        raise InvalidInputError("simulate needs a 'segments' list in --config")
    waveform, _ = run_protocol(cfg.device_params(), cfg.segments, cfg.initial)
    _emit(waveform_csv(waveform), args.out or cfg.outputs.get("waveform"), stdout)
    return EXIT_OK


def cmd_gate(args, stdout):
    cfg = _load_config(args)
    gate = cfg.build_gate()
    if cfg.inputs is None:
        raise InvalidInputError("gate needs inputs (--input or 'inputs' in the config)")
    if len(cfg.inputs) != gate.arity:
        raise InvalidInputError(f"gate {gate.name!r} takes {gate.arity} inputs, got {len(cfg.inputs)}")
    res = run_gate(gate, cfg.inputs, cfg.clock)
    report = _gate_report(gate, cfg.clock, res)
    status = EXIT_OK
    if args.expect:
        want = _parse_expect(args.expect, gate.primary)
        mismatched = {k: res.decoded.get(k) for k, v in want.items() if res.decoded.get(k) != v}
        report["expect"] = {"wanted": want, "passed": not mismatched}
        if mismatched:
            print(f"expectation failed: wanted {want}, got {mismatched}", file=sys.stderr)
            status = EXIT_FAIL
    if cfg.outputs.get("waveform"):
        _emit(waveform_csv(res.waveform), cfg.outputs["waveform"], stdout)
    _emit(dump_json(report), args.out or cfg.outputs.get("report"), stdout)
    return status


def _column_names(arity):
    if arity <= 26:
        return [chr(ord("A") + k) for k in range(arity)]
    return [f"in{k}" for k in range(arity)]


def _csv_cell(value):
    if isinstance(value, bool):
        return int(value)
    if value is None:
        return ""
    return value


def cmd_truth_table(args, stdout):
    cfg = _load_config(args)
    gate = cfg.build_gate()
    rows = truth_table(gate, cfg.clock)
    keys = list(rows[0].decoded) if rows else []
    in_cols = _column_names(gate.arity)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([*in_cols, "max_pos_A", "min_neg_A", "t1_A", *keys])
    for res in rows:
        writer.writerow([
            *res.inputs, repr(res.max_pos), repr(res.min_neg),
            repr(res.waveform[res.t1_index].i_spike), *(_csv_cell(res.decoded[k]) for k in keys),
        ])
    doc = {
        "gate": gate.name,
        "params": gate.params.to_dict(),
        "scheme": gate.scheme.to_dict(),
        "clock": cfg.clock.to_dict(),
        "primary": gate.primary,
        "rows": [
            {"inputs": list(r.inputs), "max_pos_A": r.max_pos, "min_neg_A": r.min_neg,
             "t1_A": r.waveform[r.t1_index].i_spike, "decoded": r.decoded}
            for r in rows
        ],
    }
    status = EXIT_OK
    if args.expect:
        got = [r.decoded[gate.primary] for r in rows]
        if args.expect.strip() == "reference":
            want = [reference_output(gate.name, r.inputs)[gate.primary] for r in rows]
        else:
            want = [_parse_value(v) for v in args.expect.split(",")]
        passed = got == want
        doc["expect"] = {"wanted": want, "got": got, "passed": passed}
        if not passed:
            print(f"truth table mismatch: wanted {want}, got {got}", file=sys.stderr)
            status = EXIT_FAIL
    out = args.out or cfg.outputs.get("table")
    if out is None:
        stdout.write(buf.getvalue())
    else:
        stem = Path(out)
        if stem.suffix in (".csv", ".json"):
            stem = stem.with_suffix("")
        _emit(buf.getvalue(), f"{stem}.csv", stdout)
        _emit(dump_json(doc), f"{stem}.json", stdout)
    return status


def cmd_calibrate(args, stdout):
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise InvalidInputError(f"cannot read problem {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"problem {args.config} is not valid JSON: {exc}") from None
        try:
            problem = CalibrationProblem.from_dict(data)
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"malformed calibration problem: {exc}") from None
    else:
        problem = reference_problem()
    if args.profile:
        raise InvalidInputError("calibrate takes seeds from the problem file, not --profile")
    changes = {}
    if args.seed is not None:
        changes["rng_seed"] = args.seed
    if args.budget is not None:
        changes["budget"] = args.budget
    if changes:
        problem = CalibrationProblem.from_dict({**problem.to_dict(), **changes})
    result = calibrate(problem)
    doc = {"problem": problem.to_dict(), "result": result.to_dict()}
    if {"adder", "and"} <= set(result.params):
        profile = calibration_profile(result, problem.clock)
        doc["profile"] = profile
        if args.out:
            _emit(dump_json(profile), str(Path(args.out).with_suffix("")) + ".profile.json", stdout)
    _emit(dump_json(doc), args.out, stdout)
    if args.expect == "feasible" and not result.feasible:
        print(f"calibration infeasible: best residual {result.residual!r}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_rules_check(args, stdout):
    params = load_profile(args.profile) if args.profile else SEED_PARAMS
    checks = run_rules_suite(rng_seed=args.seed, params=params)
    doc = {
        "seed": args.seed,
        "params": params.to_dict(),
        "passed": all(c.passed for c in checks),
        "checks": [c.to_dict() for c in checks],
    }
    _emit(dump_json(doc), args.out, stdout)
    return EXIT_OK if doc["passed"] else EXIT_FAIL


COMMANDS = {
    "simulate": cmd_simulate,
    "gate": cmd_gate,
    "truth-table": cmd_truth_table,
    "calibrate": cmd_calibrate,
    "rules-check": cmd_rules_check,
}


def run_command(argv=None, stdout=None):
    stdout = sys.stdout if stdout is None else stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, stdout)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CommandFailed, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
