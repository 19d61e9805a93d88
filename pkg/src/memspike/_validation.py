"""Input validation helpers shared by the estimators and the functional API."""

import math
from numbers import Real

import numpy as np


class InvalidInputError(ValueError):
    """Raised when an argument violates a documented precondition."""


def check_finite(value, name):
    if isinstance(value, bool) or not isinstance(value, Real):
        raise InvalidInputError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")
    return value


def check_positive(value, name):
    value = check_finite(value, name)
    if value <= 0:
        raise InvalidInputError(f"{name} must be > 0, got {value!r}")
    return value


def check_non_negative(value, name):
    value = check_finite(value, name)
    if value < 0:
        raise InvalidInputError(f"{name} must be >= 0, got {value!r}")
    return value


def check_bit(value, name="bit"):
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (int, np.integer)) and value in (0, 1):
        return int(value)
    if isinstance(value, (float, np.floating)) and value in (0.0, 1.0):
        return int(value)
    raise InvalidInputError(f"{name} must be 0 or 1, got {value!r}")


def check_bits(bits, arity=None):
    """Return ``bits`` as a tuple of ints, optionally enforcing its length."""
    if isinstance(bits, (str, bytes)):
        raise InvalidInputError("bits must be a sequence of 0/1 values, not a string")
    try:
        out = tuple(check_bit(b) for b in bits)
    except TypeError:
        raise InvalidInputError(f"bits must be a sequence, got {bits!r}") from None
    if not out:
        raise InvalidInputError("bits must be non-empty")
    if arity is not None and len(out) != arity:
        raise InvalidInputError(f"expected {arity} input bit(s), got {len(out)}")
    return out


def check_bit_matrix(X, arity=None):
    """Validate a 2-D array of input rows (one gate evaluation per row)."""
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] == 0:
        raise InvalidInputError(f"X must be 2-D with at least one column, got shape {arr.shape}")
    if arity is not None and arr.shape[1] != arity:
        raise InvalidInputError(f"X has {arr.shape[1]} column(s), gate arity is {arity}")
    if not np.isin(arr, (0, 1)).all():
        raise InvalidInputError("X must contain only 0/1 values")
    return arr.astype(int)


def check_segment_matrix(X):
    """Validate an (n, 2) array of ``[level, duration]`` rows."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidInputError(f"segments must have shape (n, 2), got {arr.shape}")
    if arr.shape[0] == 0:
        raise InvalidInputError("segment list must be non-empty")
    if not np.isfinite(arr).all():
        raise InvalidInputError("segment levels and durations must be finite")
    if (arr[:, 1] <= 0).any():
        raise InvalidInputError("segment durations must be > 0")
    return arr
