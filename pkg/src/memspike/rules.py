"""Qualitative device rules checked against the model.

Each check returns a :class:`RuleCheck`; :func:`run_rules_suite` bundles
them for the ``rules-check`` command and the acceptance tests.
"""

from dataclasses import dataclass, field
import itertools
import math

import numpy as np

from .device import SEED_PARAMS, DeviceParams, VoltageSegment, run_protocol
from .encoding import LogicKind, LogicScheme

__all__ = [
    "RuleCheck",
    "random_params",
    "check_bounceback",
    "check_hold_monotonicity",
    "check_diminishing_returns",
    "check_alternation_decay",
    "check_directionality",
    "check_sign_rule",
    "run_rules_suite",
]

VOLTAGE_GRID = (-1.0, -0.5, -0.05, 0.05, 0.5, 1.0)
HOLD_GRID = (0.5, 1.0, 2.0, 4.0)
# a single forward spike at |V| <= 1 V never adds more fatigue than this
MAX_SINGLE_SPIKE_FATIGUE = 0.5


@dataclass
class RuleCheck:
    name: str
    passed: bool
    cases: int
    failures: list = field(default_factory=list)

    def to_dict(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "cases": self.cases,
            "failures": self.failures[:10],
        }


def _lu(rng, lo, hi):
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def random_params(rng, n):
    """Draw ``n`` valid parameter sets, log-uniform over wide boxes.

    The fatigue gain is drawn so one forward spike at up to 1 V adds at
    most :data:`MAX_SINGLE_SPIKE_FATIGUE`; stronger fatigue can make a
    longer hold return *less* than a shorter one.
    """
    out = []
    for _ in range(n):
        g = _lu(rng, 1e-10, 1e-7)
        r = _lu(rng, 1e-10, 1e-7)
        c = _lu(rng, 0.1, 10.0)
        lam_max = MAX_SINGLE_SPIKE_FATIGUE / (g + r * c)
        out.append(
            DeviceParams(
                g_trans=g,
                r_disch=r,
                c_store=c,
                tau_q=_lu(rng, 0.5, 20.0),
                tau_c=_lu(rng, 0.1, 10.0),
                tau_d=_lu(rng, 0.1, 20.0),
                lambda_fatigue=lam_max * float(rng.uniform(0.01, 1.0)),
            )
        )
    return out


def _hold_and_return(params, level, hold, rest=1.0):
    waveform, _ = run_protocol(
        params, [VoltageSegment(level, hold), VoltageSegment(params.v_baseline, rest)]
    )
    return waveform[0].i_spike, waveform[1].i_spike


def check_bounceback(param_sets, voltages=VOLTAGE_GRID, holds=HOLD_GRID):
    """Return spike is opposite in sign and strictly smaller than the forward spike."""
    failures = []
    cases = 0
    for k, params in enumerate(param_sets):
        for v, h in itertools.product(voltages, holds):
            cases += 1
            fwd, ret = _hold_and_return(params, v, h)
            if not (abs(ret) < abs(fwd) and ret * fwd < 0):
                failures.append({"draw": k, "v": v, "hold": h, "forward": fwd, "return": ret})
    return RuleCheck("bounceback", not failures, cases, failures)


def check_hold_monotonicity(param_sets, voltages=VOLTAGE_GRID):
    """A 2 s hold returns more than a 1 s hold, but less than twice as much."""
    failures = []
    cases = 0
    for k, params in enumerate(param_sets):
        for v in voltages:
            cases += 1
            r1 = abs(_hold_and_return(params, v, 1.0)[1])
            r2 = abs(_hold_and_return(params, v, 2.0)[1])
            if not (r1 < r2 < 2 * r1):
                failures.append({"draw": k, "v": v, "return_1s": r1, "return_2s": r2})
    return RuleCheck("hold_monotonicity", not failures, cases, failures)


def pulse_train_spikes(params, level=-0.5, repeats=5, step=1.0):
    seg = [VoltageSegment(level, step), VoltageSegment(params.v_baseline, step)] * repeats
    waveform, _ = run_protocol(params, seg)
    return [rec.i_spike for rec in waveform[::2]]


def check_diminishing_returns(params=SEED_PARAMS, voltages=VOLTAGE_GRID):
    failures = []
    for v in voltages:
        mags = [abs(i) for i in pulse_train_spikes(params, v)]
        if not all(b < a for a, b in zip(mags, mags[1:])):
            failures.append({"v": v, "forward_magnitudes": mags})
    return RuleCheck("diminishing_returns", not failures, len(voltages), failures)


def alternation_spikes(params, level=0.5, repeats=2, step=1.0):
    """Magnitudes of the +V -> -V transitions in ``[+V, -V] * repeats``."""
    seg = [VoltageSegment(level, step), VoltageSegment(-level, step)] * repeats
    waveform, _ = run_protocol(params, seg)
    return [abs(rec.i_spike) for rec in waveform[1::2]]


def check_alternation_decay(params=SEED_PARAMS, voltages=(0.05, 0.5, 1.0)):
    failures = []
    for v in voltages:
        first, second = alternation_spikes(params, v)
        if not second < first:
            failures.append({"v": v, "first": first, "second": second})
    return RuleCheck("alternation_decay", not failures, len(voltages), failures)


def t1_response(params, va, vb, step=1.0):
    seg = [VoltageSegment(va, step), VoltageSegment(vb, step), VoltageSegment(params.v_baseline, step)]
    waveform, _ = run_protocol(params, seg)
    return waveform[2].i_spike


def check_directionality(params=SEED_PARAMS, m_high=0.5, m_low=0.001):
    """``[A, B, 0]`` and ``[B, A, 0]`` give different t_1 responses whenever A != B."""
    failures = []
    cases = 0
    for kind in LogicKind:
        scheme = LogicScheme(kind, m_high, m_low)
        va, vb = scheme.level(1), scheme.level(0)
        cases += 1
        ab, ba = t1_response(params, va, vb), t1_response(params, vb, va)
        if ab == ba:
            failures.append({"scheme": kind.value, "t1_10": ab, "t1_01": ba})
    return RuleCheck("directionality", not failures, cases, failures)


def check_sign_rule(params, segments, initial=None):
    """Where the transition term dominates the stored-charge term, the spike
    follows the sign of the voltage step."""
    waveform, _ = run_protocol(params, segments, initial)
    failures = []
    cases = 0
    v_prev = params.v_baseline if initial is None else initial.v_prev
    for rec in waveform:
        drive = (params.g_trans + params.r_disch * params.c_store) * abs(rec.delta_v)
        offset = params.r_disch * abs(params.c_store * v_prev - rec.q_before)
        if drive > offset:
            cases += 1
            if np.sign(rec.i_spike) != np.sign(rec.delta_v):
                failures.append({"t": rec.t, "delta_v": rec.delta_v, "i": rec.i_spike})
        v_prev = rec.level
    return RuleCheck("sign_rule", not failures, cases, failures)


def run_rules_suite(rng_seed=0, n_draws=100, params=SEED_PARAMS):
    rng = np.random.default_rng(rng_seed)
    draws = random_params(rng, n_draws)
    checks = [
        check_bounceback(draws),
        check_hold_monotonicity(draws),
        check_diminishing_returns(params),
        check_alternation_decay(params),
        check_directionality(params),
    ]
    sign_cases = sign_failures = 0
    sign_fail_list = []
    for p in [params, *draws]:
        for v, h in itertools.product(VOLTAGE_GRID, HOLD_GRID):
            seg = [VoltageSegment(v, h), VoltageSegment(p.v_baseline, 1.0), VoltageSegment(-v, h)]
            res = check_sign_rule(p, seg)
            sign_cases += res.cases
            sign_failures += len(res.failures)
            sign_fail_list.extend(res.failures)
    checks.append(RuleCheck("sign_rule", sign_failures == 0, sign_cases, sign_fail_list))
    return checks
