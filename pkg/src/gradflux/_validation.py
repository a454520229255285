"""Input validation helpers shared by the functional API and the estimators."""

import math

import numpy as np

from .exceptions import InvalidParameters, InvalidValue, SchemaError


def check_positive_finite(value, name, exc=InvalidValue):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise exc(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(v) or v <= 0:
        raise exc(f"{name} must be positive and finite, got {value!r}")
    return v


def check_finite(value, name, exc=InvalidValue):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise exc(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(v):
        raise exc(f"{name} must be finite, got {value!r}")
    return v


def check_1d(values, name, exc=InvalidValue, min_len=1):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise exc(f"{name} must be one-dimensional")
    if arr.size < min_len:
        raise exc(f"{name} needs at least {min_len} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise exc(f"{name} contains non-finite entries")
    return arr


def check_increasing(values, name, exc=InvalidValue):
    arr = np.asarray(values, dtype=float)
    if np.any(np.diff(arr) <= 0):
        raise exc(f"{name} must be strictly increasing")
    return arr


def require_keys(mapping, keys, what):
    if not isinstance(mapping, dict):
        raise SchemaError(f"{what}: expected a JSON object")
    missing = [k for k in keys if k not in mapping]
    if missing:
        raise SchemaError(f"{what}: missing keys {missing}")


__all__ = [
    "InvalidParameters",
    "check_positive_finite",
    "check_finite",
    "check_1d",
    "check_increasing",
    "require_keys",
]
