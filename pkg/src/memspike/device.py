"""Event-based phenomenological memristor.

The device emits one instantaneous current spike whenever a new voltage
level is applied and relaxes in closed form while the level is held.

Transition (a new level ``V`` applied while the previous level was
``v_prev``)::

    i = (g_trans * (V - v_prev) + r_disch * (c_store * V - q)) / (1 + d)
    d <- d + lambda_fatigue * |i|

Hold at level ``V`` for ``dt`` seconds::

    dq/dt = (c_store * V - q) / tau_c - q / tau_q
    q(dt) = q_eq + (q0 - q_eq) * exp(-dt / tau_eff)
    d(dt) = d0 * exp(-dt / tau_d)

with ``tau_eff = 1 / (1/tau_c + 1/tau_q)`` and
``q_eq = c_store * V * tau_eff / tau_c``.

``q`` is a signed stored-charge surrogate and ``d`` a non-negative fatigue
that divides every spike, so repeated stimulation yields smaller responses.
The device obeys four qualitative rules by construction: the return spike
after a hold is smaller than and opposite to the forward spike, longer
holds give larger (but less than doubled) returns, repeated pulses shrink,
and the response depends on input order.
"""

from dataclasses import asdict, dataclass, replace
import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import (
    InvalidInputError,
    check_finite,
    check_non_negative,
    check_positive,
    check_segment_matrix,
)

__all__ = [
    "DeviceParams",
    "DeviceState",
    "VoltageSegment",
    "SpikeRecord",
    "SEED_PARAMS",
    "null_state",
    "transition_spike",
    "relax",
    "apply_segment",
    "run_protocol",
    "settle",
    "is_null",
    "MemristorDevice",
]

WAVEFORM_COLUMNS = ("t_s", "v_applied_V", "delta_v_V", "i_spike_A", "q", "d")


@dataclass(frozen=True)
class DeviceParams:
    """Model coefficients.

    Parameters
    ----------
    g_trans : float
        Transition gain (A/V).
    r_disch : float
        Discharge gain (A per charge unit).
    c_store : float
        Storage coefficient (charge units per volt).
    tau_q : float
        Charge retention time (s).
    tau_c : float
        Charging time (s).
    tau_d : float
        Fatigue retention time (s).
    lambda_fatigue : float
        Fatigue added per ampere of spike magnitude.
    v_baseline : float
        Rest voltage (V).
    """

    g_trans: float = 2.4e-8
    r_disch: float = 1.2e-8
    c_store: float = 1.0
    tau_q: float = 3.5
    tau_c: float = 1.0
    tau_d: float = 5.0
    lambda_fatigue: float = 1e7
    v_baseline: float = 0.0

    def __post_init__(self):
        for name in ("tau_q", "tau_c", "tau_d"):
            object.__setattr__(self, name, check_positive(getattr(self, name), name))
        for name in ("g_trans", "r_disch", "c_store", "lambda_fatigue"):
            object.__setattr__(self, name, check_non_negative(getattr(self, name), name))
        object.__setattr__(self, "v_baseline", check_finite(self.v_baseline, "v_baseline"))

    @property
    def tau_eff(self):
        return 1.0 / (1.0 / self.tau_c + 1.0 / self.tau_q)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidInputError(f"unknown device parameter(s): {sorted(unknown)}")
        return cls(**data)

    def scaled(self, factor):
        """Same dynamics with every current multiplied by ``factor``."""
        factor = check_positive(factor, "factor")
        return replace(
            self,
            g_trans=self.g_trans * factor,
            r_disch=self.r_disch * factor,
            lambda_fatigue=self.lambda_fatigue / factor,
        )


SEED_PARAMS = DeviceParams()


@dataclass(frozen=True)
class DeviceState:
    v_prev: float = 0.0
    q: float = 0.0
    d: float = 0.0
    t_now: float = 0.0

    def __post_init__(self):
        for name in ("v_prev", "q", "d", "t_now"):
            object.__setattr__(self, name, check_finite(getattr(self, name), name))
        if self.d < 0:
            raise InvalidInputError(f"fatigue d must be >= 0, got {self.d!r}")


@dataclass(frozen=True)
class VoltageSegment:
    level: float
    duration: float

    def __post_init__(self):
        object.__setattr__(self, "level", check_finite(self.level, "level"))
        object.__setattr__(self, "duration", check_positive(self.duration, "duration"))


@dataclass(frozen=True)
class SpikeRecord:
    """One transition event. ``q_before``/``d_before`` are pre-transition."""

    t: float
    level: float
    delta_v: float
    i_spike: float
    q_before: float
    d_before: float

    def as_row(self):
        return (self.t, self.level, self.delta_v, self.i_spike, self.q_before, self.d_before)


def null_state(params=SEED_PARAMS):
    return DeviceState(v_prev=params.v_baseline, q=0.0, d=0.0, t_now=0.0)


def transition_spike(state, params, v_new):
    """Apply a new level instantaneously; return ``(current, new_state)``."""
    v_new = check_finite(v_new, "v_new")
    i = _spike(params, state.v_prev, state.q, state.d, v_new)
    d = state.d + params.lambda_fatigue * abs(i)
    return i, DeviceState(v_prev=v_new, q=state.q, d=d, t_now=state.t_now)


def relax(state, params, level, dt):
    """Hold ``level`` for ``dt`` seconds using the closed-form solution."""
    level = check_finite(level, "level")
    dt = check_non_negative(dt, "dt")
    if dt == 0:
        return state
    q, d = _relax(params, state.q, state.d, level, dt)
    return DeviceState(v_prev=state.v_prev, q=q, d=d, t_now=state.t_now + dt)


def apply_segment(state, params, seg):
    """Transition to ``seg.level`` then hold it for ``seg.duration``."""
    i, mid = transition_spike(state, params, seg.level)
    record = SpikeRecord(
        t=state.t_now,
        level=seg.level,
        delta_v=seg.level - state.v_prev,
        i_spike=i,
        q_before=state.q,
        d_before=state.d,
    )
    return record, relax(mid, params, seg.level, seg.duration)


def run_protocol(params, segments, initial=None):
    """Simulate a segment sequence; return ``(waveform, final_state)``.

    The loop is the inlined composition of :func:`apply_segment` and gives
    bit-identical results to it.
    """
    segments = list(segments)
    if not segments:
        raise InvalidInputError("segment sequence must be non-empty")
    state = null_state(params) if initial is None else initial
    v, q, d, t = state.v_prev, state.q, state.d, state.t_now
    lam = params.lambda_fatigue
    waveform = []
    for seg in segments:
        level = seg.level
        i = _spike(params, v, q, d, level)
        waveform.append(SpikeRecord(t, level, level - v, i, q, d))
        d = d + lam * abs(i)
        v = level
        q, d = _relax(params, q, d, level, seg.duration)
        t = t + seg.duration
    return waveform, DeviceState(v_prev=v, q=q, d=d, t_now=t)


def settle(state, params, t_wait):
    """Rest at baseline for ``t_wait`` seconds without emitting a spike."""
    t_wait = check_non_negative(t_wait, "t_wait")
    rested = relax(state, params, params.v_baseline, t_wait)
    return replace(rested, v_prev=params.v_baseline)


def is_null(state, eps=1e-9, params=None):
    """True when the device has lost its short-term memory.

    ``q`` is compared in stored-voltage units (``q / c_store``) when
    ``params`` is given, so ``eps`` is a fraction of the 1 V working scale.
    """
    baseline = 0.0 if params is None else params.v_baseline
    q_scale = 1.0 if params is None or params.c_store == 0 else params.c_store
    return (
        abs(state.v_prev - baseline) <= eps
        and abs(state.q) / q_scale <= eps
        and state.d <= eps
    )


def _spike(params, v_prev, q, d, v_new):
    return (params.g_trans * (v_new - v_prev) + params.r_disch * (params.c_store * v_new - q)) / (
        1.0 + d
    )


def _relax(params, q, d, level, dt):
    tau_eff = params.tau_eff
    q_eq = params.c_store * level * tau_eff / params.tau_c
    q = q_eq + (q - q_eq) * math.exp(-dt / tau_eff)
    d = d * math.exp(-dt / params.tau_d)
    return q, d


def waveform_array(waveform):
    """Stack records into an ``(n, 6)`` array in :data:`WAVEFORM_COLUMNS` order."""
    if not waveform:
        return np.empty((0, len(WAVEFORM_COLUMNS)))
    return np.array([rec.as_row() for rec in waveform], dtype=float)


class MemristorDevice(TransformerMixin, BaseEstimator):
    """Estimator wrapper around the device model.

    ``transform`` maps an ``(n, 2)`` array of ``[level, duration]`` rows to
    the ``(n, 6)`` waveform (columns ``t_s, v_applied_V, delta_v_V,
    i_spike_A, q, d``), always starting from the null state.

    Examples
    --------
    >>> dev = MemristorDevice().fit()
    >>> dev.transform([[-0.5, 1.0], [0.0, 1.0]])[:, 3]  # doctest: +SKIP
    array([-1.80e-08,  1.34e-08])
    """

    def __init__(
        self,
        g_trans=2.4e-8,
        r_disch=1.2e-8,
        c_store=1.0,
        tau_q=3.5,
        tau_c=1.0,
        tau_d=5.0,
        lambda_fatigue=1e7,
        v_baseline=0.0,
    ):
        self.g_trans = g_trans
        self.r_disch = r_disch
        self.c_store = c_store
        self.tau_q = tau_q
        self.tau_c = tau_c
        self.tau_d = tau_d
        self.lambda_fatigue = lambda_fatigue
        self.v_baseline = v_baseline

    @classmethod
    def from_params(cls, params):
        return cls(**params.to_dict())

    def fit(self, X=None, y=None):
        self.params_ = DeviceParams(**self.get_params())
        if X is not None:
            self.n_features_in_ = check_segment_matrix(X).shape[1]
        return self

    def _params(self):
        if hasattr(self, "params_"):
            return self.params_
        return DeviceParams(**self.get_params())

    def simulate(self, segments, initial=None):
        return run_protocol(self._params(), segments, initial)

    def transform(self, X):
        arr = check_segment_matrix(X)
        segments = [VoltageSegment(float(lv), float(dt)) for lv, dt in arr]
        waveform, _ = run_protocol(self._params(), segments)
        return waveform_array(waveform)
