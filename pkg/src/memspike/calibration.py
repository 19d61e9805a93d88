"""Fit device parameters to published current ranges by direct search.

The objective is a weighted sum of hinge distances: each constraint asks
that a simulated observable fall inside an interval (or that some record
in a window does / does not fall inside it). Distances are normalised by a
per-constraint current scale, so the loss is zero exactly when every
constraint holds.
"""

from dataclasses import dataclass, field, replace
import itertools
import math

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import InvalidInputError, check_bits, check_non_negative, check_positive
from .device import DeviceParams, run_protocol
from .encoding import window_slice
from .sequencer import AND_THRESHOLD, ClockConfig, assemble_result, build_protocol, builtin_gate

__all__ = [
    "Interval",
    "Constraint",
    "FreeParam",
    "CalibrationProblem",
    "CalibrationResult",
    "build_paper_constraints",
    "reference_problem",
    "default_free_params",
    "loss",
    "calibrate",
    "PatternSearchCalibrator",
]

NA = 1e-9
# floor for a violated constraint sitting exactly on an open boundary
_EDGE_PENALTY = 1e-9


@dataclass(frozen=True)
class Interval:
    lo: float = -math.inf
    hi: float = math.inf
    lo_closed: bool = True
    hi_closed: bool = False

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise InvalidInputError(f"empty interval [{self.lo}, {self.hi}]")
        if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
            raise InvalidInputError("degenerate interval must be closed on both ends")

    def __contains__(self, x):
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above and below

    def distance(self, x):
        """Hinge distance to the closure (0 on or inside the bounds)."""
        if x < self.lo:
            return self.lo - x
        if x > self.hi:
            return x - self.hi
        return 0.0

    def exit_distance(self, x):
        """How far ``x`` must move to leave the interval (0 if already out)."""
        if x not in self:
            return 0.0
        return min(x - self.lo, self.hi - x)

    def to_dict(self):
        return {
            "lo": None if math.isinf(self.lo) else self.lo,
            "hi": None if math.isinf(self.hi) else self.hi,
            "lo_closed": self.lo_closed,
            "hi_closed": self.hi_closed,
        }

    @classmethod
    def from_dict(cls, data):
        lo = -math.inf if data.get("lo") is None else float(data["lo"])
        hi = math.inf if data.get("hi") is None else float(data["hi"])
        return cls(lo, hi, bool(data.get("lo_closed", True)), bool(data.get("hi_closed", False)))


OBSERVABLES = ("max_pos", "min_neg", "record", "records_in", "decoded")


@dataclass(frozen=True)
class Constraint:
    """A target for one gate run.

    ``observable`` is one of ``max_pos``/``min_neg`` (response-window
    extrema), ``record`` (current at ``index``), ``records_in`` (whether any
    record in ``window`` lies in ``target``; ``present`` says which is
    wanted) or ``decoded`` (``key`` of the decoded outputs must equal
    ``target``). ``profile`` names the device profile the run uses.
    """

    id: str
    gate: str
    inputs: tuple
    observable: str
    target: object
    profile: str = "adder"
    weight: float = 1.0
    scale: float = NA
    index: int | None = None
    window: tuple | None = None
    present: bool = True
    key: str | None = None

    def __post_init__(self):
        if self.observable not in OBSERVABLES:
            raise InvalidInputError(f"unknown observable {self.observable!r}")
        object.__setattr__(self, "inputs", check_bits(self.inputs))
        object.__setattr__(self, "weight", check_non_negative(self.weight, "weight"))
        object.__setattr__(self, "scale", check_positive(self.scale, "scale"))
        if self.observable == "record" and self.index is None:
            raise InvalidInputError("record constraints need an index")
        if self.observable == "decoded" and self.key is None:
            raise InvalidInputError("decoded constraints need a key")
        if self.observable != "decoded" and not isinstance(self.target, Interval):
            raise InvalidInputError("interval observables need an Interval target")
        if self.window is not None:
            object.__setattr__(self, "window", tuple(self.window))

    def evaluate(self, result):
        """Return ``(satisfied, normalised_penalty, observed)``."""
        obs = self.observable
        if obs == "decoded":
            observed = result.decoded.get(self.key)
            ok = observed == self.target
            return ok, 0.0 if ok else 1.0, observed
        if obs == "records_in":
            currents = [rec.i_spike for rec in result.waveform[window_slice(self.window)]]
            inside = [x for x in currents if x in self.target]
            if self.present:
                if inside:
                    return True, 0.0, True
                gap = min((self.target.distance(x) for x in currents), default=math.inf)
                return False, max(gap / self.scale, _EDGE_PENALTY), False
            if not inside:
                return True, 0.0, False
            gap = sum(max(self.target.exit_distance(x) / self.scale, _EDGE_PENALTY) for x in inside)
            return False, gap, True
        if obs == "max_pos":
            observed = result.max_pos
        elif obs == "min_neg":
            observed = result.min_neg
        else:
            observed = result.waveform[self.index].i_spike
        if observed in self.target:
            return True, 0.0, observed
        return False, max(self.target.distance(observed) / self.scale, _EDGE_PENALTY), observed

    def to_dict(self):
        target = self.target.to_dict() if isinstance(self.target, Interval) else self.target
        return {
            "id": self.id,
            "gate": self.gate,
            "inputs": list(self.inputs),
            "observable": self.observable,
            "target": target,
            "profile": self.profile,
            "weight": self.weight,
            "scale": self.scale,
            "index": self.index,
            "window": None if self.window is None else list(self.window),
            "present": self.present,
            "key": self.key,
        }

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if data["observable"] != "decoded":
            data["target"] = Interval.from_dict(data["target"])
        data["inputs"] = tuple(data["inputs"])
        return cls(**data)


@dataclass(frozen=True)
class FreeParam:
    """A searched coefficient with positive box bounds (searched in log space)."""

    profile: str
    name: str
    lower: float
    upper: float

    def __post_init__(self):
        if self.name not in DeviceParams.__dataclass_fields__ or self.name == "v_baseline":
            raise InvalidInputError(f"{self.name!r} is not a searchable device parameter")
        check_positive(self.lower, "lower")
        check_positive(self.upper, "upper")
        if not self.lower < self.upper:
            raise InvalidInputError(f"bounds for {self.name} must satisfy lower < upper")

    def to_dict(self):
        return {"profile": self.profile, "name": self.name, "lower": self.lower, "upper": self.upper}


@dataclass(frozen=True)
class CalibrationProblem:
    seed: dict
    free: tuple
    constraints: tuple
    budget: int = 100_000
    rng_seed: int = 42
    clock: ClockConfig = ClockConfig()
    discrete_options: tuple = (False, True)

    def __post_init__(self):
        if int(self.budget) < 1:
            raise InvalidInputError("budget must be >= 1")
        object.__setattr__(self, "budget", int(self.budget))
        object.__setattr__(self, "free", tuple(self.free))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for fp in self.free:
            if fp.profile not in self.seed:
                raise InvalidInputError(f"free parameter refers to unknown profile {fp.profile!r}")
        for c in self.constraints:
            if c.profile not in self.seed:
                raise InvalidInputError(f"constraint {c.id} refers to unknown profile {c.profile!r}")
        if not self.discrete_options:
            raise InvalidInputError("discrete_options must list at least one choice")

    def to_dict(self):
        return {
            "seed": {k: v.to_dict() for k, v in self.seed.items()},
            "free": [fp.to_dict() for fp in self.free],
            "constraints": [c.to_dict() for c in self.constraints],
            "budget": self.budget,
            "rng_seed": self.rng_seed,
            "clock": self.clock.to_dict(),
            "discrete_options": list(self.discrete_options),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            seed={k: DeviceParams.from_dict(v) for k, v in data["seed"].items()},
            free=tuple(FreeParam(**fp) for fp in data.get("free", ())),
            constraints=tuple(Constraint.from_dict(c) for c in data["constraints"]),
            budget=data.get("budget", 100_000),
            rng_seed=data.get("rng_seed", 42),
            clock=ClockConfig.from_dict(data.get("clock", {})),
            discrete_options=tuple(data.get("discrete_options", (False, True))),
        )


_FA_INTERVALS = {
    0: Interval(0.0, 5 * NA),
    1: Interval(5 * NA, 9 * NA),
    2: Interval(9 * NA, 12.3 * NA),
    3: Interval(12.5 * NA, math.inf, lo_closed=False),
}
_HAS_ONE = Interval(-20 * NA, -17.5 * NA, lo_closed=False, hi_closed=True)
_CARRY = Interval(-17.5 * NA, -5 * NA, lo_closed=False, hi_closed=True)
_HAS_ZERO = Interval(-5 * NA, 0.0, lo_closed=False, hi_closed=True)
# input spikes and the t_1 response; the read pulse and the tail are excluded
_FLAG_WINDOW = (0, -3)


def build_paper_constraints():
    """Range, flag, AND and NOT targets taken from the published gate data."""
    out = []
    for bits in itertools.product((0, 1), repeat=3):
        tag = "".join(map(str, bits))
        s = sum(bits)
        out.append(Constraint(f"fa-{tag}-max_pos", "full-adder", bits, "max_pos", _FA_INTERVALS[s]))
        out.append(
            Constraint(f"fa-{tag}-has_one", "full-adder", bits, "records_in", _HAS_ONE,
                       window=_FLAG_WINDOW, present=s >= 1)
        )
        out.append(
            Constraint(f"fa-{tag}-carry", "full-adder", bits, "records_in", _CARRY,
                       window=_FLAG_WINDOW, present=s >= 2)
        )
        out.append(
            Constraint(f"fa-{tag}-has_zero", "full-adder", bits, "records_in", _HAS_ZERO,
                       window=(0, None), present=s <= 2)
        )
    for bits in itertools.product((0, 1), repeat=2):
        tag = "".join(map(str, bits))
        target = (
            Interval(AND_THRESHOLD, math.inf, lo_closed=False)
            if all(bits)
            else Interval(0.0, AND_THRESHOLD, hi_closed=True)
        )
        out.append(Constraint(f"and-{tag}-max_pos", "and", bits, "max_pos", target,
                              profile="and", scale=0.1e-6))
    out.append(Constraint("not-0-t1", "not", (0,), "record", Interval(0.0, math.inf, lo_closed=False),
                          index=1))
    out.append(Constraint("not-1-t1", "not", (1,), "record", Interval(-math.inf, 0.0), index=1))
    return tuple(out)


def default_free_params():
    """Log-space boxes. Time constants are capped so that 40 s of rest
    always brings the device back within 1e-9 of the null state."""
    adder = [
        FreeParam("adder", "g_trans", 1e-12, 1e-6),
        FreeParam("adder", "r_disch", 1e-12, 1e-6),
        FreeParam("adder", "c_store", 1e-2, 1e2),
        FreeParam("adder", "lambda_fatigue", 1e3, 1e10),
        FreeParam("adder", "tau_c", 0.05, 1.9),
        FreeParam("adder", "tau_d", 0.05, 1.8),
        FreeParam("adder", "tau_q", 0.5, 20.0),
    ]
    gate_and = [
        FreeParam("and", "g_trans", 1e-10, 1e-4),
        FreeParam("and", "r_disch", 1e-10, 1e-4),
        FreeParam("and", "tau_d", 0.05, 1.8),
    ]
    return tuple(adder + gate_and)


def reference_problem(budget=100_000, rng_seed=42):
    """The shipped calibration: published constraints, seed profiles, default boxes."""
    from . import profiles

    return CalibrationProblem(
        seed={"adder": profiles.get_profile("seed"), "and": profiles.get_profile("and-seed")},
        free=default_free_params(),
        constraints=build_paper_constraints(),
        budget=budget,
        rng_seed=rng_seed,
    )


class _Objective:
    """Caches gate specs and protocols; evaluates the loss for a params dict."""

    def __init__(self, problem, inter_input_return):
        self.problem = problem
        self.clock = replace(problem.clock, inter_input_return=inter_input_return)
        self.gates = {}
        self.runs = {}
        for c in problem.constraints:
            key = (c.gate, c.profile, c.inputs)
            if key in self.runs:
                continue
            gate = self.gates.get(c.gate)
            if gate is None:
                gate = self.gates[c.gate] = builtin_gate(c.gate, problem.seed[c.profile])
            self.runs[key] = build_protocol(gate, c.inputs, self.clock)
        self.needs_decode = any(c.observable == "decoded" for c in problem.constraints)

    def results(self, params):
        out = {}
        for (gate_name, profile, bits), segments in self.runs.items():
            gate = self.gates[gate_name].with_params(params[profile])
            waveform, final = run_protocol(gate.params, segments)
            out[(gate_name, profile, bits)] = assemble_result(
                gate, self.clock, bits, waveform, final, decode=self.needs_decode
            )
        return out

    def __call__(self, params):
        try:
            results = self.results(params)
            total = 0.0
            for c in self.problem.constraints:
                _, pen, _ = c.evaluate(results[(c.gate, c.profile, c.inputs)])
                total += c.weight * pen
        except (ArithmeticError, ValueError):
            return math.inf
        return total if math.isfinite(total) else math.inf

    def report(self, params):
        results = self.results(params)
        rows = []
        for c in self.problem.constraints:
            ok, pen, observed = c.evaluate(results[(c.gate, c.profile, c.inputs)])
            rows.append(
                {"id": c.id, "satisfied": ok, "penalty": c.weight * pen, "observed": observed}
            )
        return rows, results


def loss(params, problem, inter_input_return=None):
    """Weighted hinge loss of ``params`` (a ``{profile: DeviceParams}`` dict)."""
    if isinstance(params, DeviceParams):
        params = {name: params for name in problem.seed}
    iir = problem.discrete_options[0] if inter_input_return is None else inter_input_return
    return _Objective(problem, iir)(params)


def _apply(problem, x):
    updates = {}
    for fp, val in zip(problem.free, x):
        updates.setdefault(fp.profile, {})[fp.name] = float(math.exp(val))
    return {
        name: replace(params, **updates.get(name, {})) for name, params in problem.seed.items()
    }


@dataclass
class CalibrationResult:
    params: dict
    residual: float
    feasible: bool
    n_evals: int
    inter_input_return: bool
    report: dict
    trajectory: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "params": {k: v.to_dict() for k, v in self.params.items()},
            "residual": self.residual,
            "feasible": self.feasible,
            "infeasible": not self.feasible,
            "n_evals": self.n_evals,
            "inter_input_return": self.inter_input_return,
            "report": self.report,
        }


def _pattern_search(f, x0, lb, ub, budget, rng, step0, min_step, sigma):
    """Axis-aligned poll with step shrinking and randomised restarts.

    Each generation evaluates ``x +/- step_k e_k`` for every coordinate in a
    fixed order and moves to the best strictly improving proposal (lowest
    index on ties). Without an improvement all steps halve; once they fall
    below ``min_step`` the search restarts from a random box point or a
    perturbation of the incumbent.
    """
    x = np.clip(x0, lb, ub)
    fx = f(x)
    n = 1
    best_f, best_x = fx, x.copy()
    trajectory = [(n, fx)]
    width = ub - lb
    step = np.minimum(np.full_like(x, step0), width)
    while n < budget and best_f > 0:
        proposals = []
        for k in range(len(x)):
            for sign in (1.0, -1.0):
                y = x.copy()
                y[k] = min(max(y[k] + sign * step[k], lb[k]), ub[k])
                if y[k] != x[k]:
                    proposals.append((k, y))
        fs = []
        for _, y in proposals:
            if n >= budget:
                break
            fs.append(f(y))
            n += 1
        j = int(np.argmin(fs)) if fs else -1
        if fs and fs[j] < fx:
            k, x = proposals[j]
            fx = fs[j]
            step[k] = min(step[k] * 2.0, width[k])
            trajectory.append((n, fx))
            if fx < best_f:
                best_f, best_x = fx, x.copy()
            continue
        step *= 0.5
        if step.max() < min_step and n < budget:
            if rng.random() < 0.5:
                x = rng.uniform(lb, ub)
            else:
                x = np.clip(best_x + rng.normal(0.0, sigma, len(x)), lb, ub)
            fx = f(x)
            n += 1
            step = np.minimum(np.full_like(x, step0), width)
            trajectory.append((n, fx))
            if fx < best_f:
                best_f, best_x = fx, x.copy()
    return best_x, best_f, n, trajectory


def calibrate(problem, initial_step=math.log(2.0), min_step=1e-3, restart_sigma=0.3):
    """Search the free parameters of ``problem`` for zero loss.

    Each discrete option (baseline returns between inputs or not) gets its
    own sub-search with half the budget; the search stops as soon as one
    reaches zero loss. Running out of budget is not an error: the best
    point is returned with ``feasible=False``.
    """
    lb = np.log([fp.lower for fp in problem.free])
    ub = np.log([fp.upper for fp in problem.free])
    x0 = np.array(
        [math.log(getattr(problem.seed[fp.profile], fp.name)) for fp in problem.free], dtype=float
    )
    seeds = np.random.SeedSequence(problem.rng_seed).spawn(len(problem.discrete_options))
    share = max(1, problem.budget // len(problem.discrete_options))
    best = None
    total = 0
    for option, ss in zip(problem.discrete_options, seeds):
        objective = _Objective(problem, option)
        if not problem.free:
            params = dict(problem.seed)
            fx, x, n, traj = objective(params), x0, 1, [(1, None)]
        else:
            x, fx, n, traj = _pattern_search(
                lambda v: objective(_apply(problem, v)),
                x0, lb, ub, min(share, problem.budget - total), np.random.default_rng(ss),
                initial_step, min_step, restart_sigma,
            )
            params = _apply(problem, x)
        total += n
        if best is None or fx < best[1]:
            best = (params, fx, option, objective, traj)
        if fx == 0 or total >= problem.budget:
            break
    params, fx, option, objective, traj = best
    rows, _ = objective.report(params)
    report = {
        "constraints": rows,
        "n_satisfied": sum(r["satisfied"] for r in rows),
        "n_constraints": len(rows),
        "evaluations": total,
    }
    return CalibrationResult(
        params=params,
        residual=fx,
        feasible=fx == 0,
        n_evals=total,
        inter_input_return=option,
        report=report,
        trajectory=traj,
    )


class PatternSearchCalibrator(BaseEstimator):
    """Estimator front end for :func:`calibrate`.

    ``fit(constraints, seed)`` runs the search; the outcome is exposed as
    ``params_``, ``residual_``, ``feasible_``, ``n_evals_`` and
    ``report_``.
    """

    def __init__(
        self,
        free=None,
        budget=100_000,
        rng_seed=42,
        initial_step=math.log(2.0),
        min_step=1e-3,
        restart_sigma=0.3,
        discrete_options=(False, True),
    ):
        self.free = free
        self.budget = budget
        self.rng_seed = rng_seed
        self.initial_step = initial_step
        self.min_step = min_step
        self.restart_sigma = restart_sigma
        self.discrete_options = discrete_options

    def fit(self, constraints=None, seed=None):
        from . import profiles

        if constraints is None:
            constraints = build_paper_constraints()
        if seed is None:
            seed = {"adder": profiles.get_profile("seed"), "and": profiles.get_profile("and-seed")}
        problem = CalibrationProblem(
            seed=seed,
            free=default_free_params() if self.free is None else self.free,
            constraints=tuple(constraints),
            budget=self.budget,
            rng_seed=self.rng_seed,
            discrete_options=tuple(self.discrete_options),
        )
        self.result_ = calibrate(problem, self.initial_step, self.min_step, self.restart_sigma)
        self.params_ = self.result_.params
        self.residual_ = self.result_.residual
        self.feasible_ = self.result_.feasible
        self.n_evals_ = self.result_.n_evals
        self.report_ = self.result_.report
        return self

    def score(self, constraints=None, seed=None):
        """Negative residual, so larger is better."""
        return -self.residual_
