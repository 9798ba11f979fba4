"""Small input-checking helpers used across the package."""

import numbers

import numpy as np

from .exceptions import DomainError


def check_scalar(value, name, *, lower=None, upper=None, strict_lower=False,
                 strict_upper=False):
    """Coerce ``value`` to float and check it against optional bounds.

    Raises DomainError on a non-finite value or a bound violation.
    """
    if isinstance(value, bool) or not isinstance(value, (numbers.Real, np.floating, np.integer)):
        raise DomainError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value}")
    if lower is not None:
        if strict_lower and not value > lower:
            raise DomainError(f"{name} must be > {lower}, got {value}")
        if not strict_lower and not value >= lower:
            raise DomainError(f"{name} must be >= {lower}, got {value}")
    if upper is not None:
        if strict_upper and not value < upper:
            raise DomainError(f"{name} must be < {upper}, got {value}")
        if not strict_upper and not value <= upper:
            raise DomainError(f"{name} must be <= {upper}, got {value}")
    return value


def check_unit_interval(x, name="x"):
    """Return ``x`` as a float array after checking every entry lies in [0, 1]."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise DomainError(f"{name} must lie in [0, 1]; got range "
                          f"[{arr.min()}, {arr.max()}]")
    return arr


def check_nodal_values(values, n_nodes, name="values"):
    """Return a finite 1-D float array of length ``n_nodes``."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != n_nodes:
        raise DomainError(f"{name} must have shape ({n_nodes},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def check_decreasing_schedule(schedule, name="eps_schedule"):
    """Return a strictly decreasing list of positive floats."""
    sched = [check_scalar(e, name, lower=0.0, strict_lower=True) for e in schedule]
    if not sched:
        raise DomainError(f"{name} must be nonempty")
    if any(b >= a for a, b in zip(sched, sched[1:])):
        raise DomainError(f"{name} must be strictly decreasing, got {sched}")
    return sched
