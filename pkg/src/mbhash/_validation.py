"""Input validation helpers shared across the package."""

from __future__ import annotations

import numbers

import numpy as np

PROB_ATOL = 1e-12


class ParameterError(ValueError):
    """Raised when a numeric parameter falls outside its admissible domain."""


def check_unit_interval(value, name, *, open_low=False, open_high=False):
    """Return ``value`` as float after checking it lies in [0, 1]."""
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise ParameterError(f"{name} must be a real number, got {value!r}")
    x = float(value)
    low_ok = x > 0.0 if open_low else x >= 0.0
    high_ok = x < 1.0 if open_high else x <= 1.0
    if not (low_ok and high_ok) or np.isnan(x):
        lo = "(" if open_low else "["
        hi = ")" if open_high else "]"
        raise ParameterError(f"{name}={x!r} outside {lo}0, 1{hi}")
    return x


def check_positive_int(value, name, *, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        if isinstance(value, numbers.Real) and float(value).is_integer():
            value = int(value)
        else:
            raise ParameterError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ParameterError(f"{name}={value} must be >= {minimum}")
    return value


def check_probability_vector(p, name="p", *, size=None):
    """Validate a probability vector.

    Deviations of the total from one below ``PROB_ATOL`` are renormalized
    silently; anything larger is an error.
    """
    arr = np.array(p, dtype=np.float64).ravel()
    if size is not None and arr.size != size:
        raise ParameterError(f"{name} must have {size} entries, got {arr.size}")
    if arr.size == 0:
        raise ParameterError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} has non-finite entries")
    if np.any(arr < -PROB_ATOL):
        raise ParameterError(f"{name} has negative entries: {arr}")
    arr = np.clip(arr, 0.0, None)
    total = float(arr.sum())
    if abs(total - 1.0) > PROB_ATOL:
        raise ParameterError(f"{name} sums to {total!r}, not 1")
    return arr / total


def check_rng(seed):
    """Turn ``None``, an int, a SeedSequence or a Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
