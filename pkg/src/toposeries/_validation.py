"""Input validation helpers shared by the estimators and functions."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import ConfigError


def check_cloud(X, name: str = "point cloud") -> np.ndarray:
    """Return ``X`` as a finite 2-D float array with at least one row and column."""
    try:
        return check_array(X, dtype=float, ensure_2d=True, ensure_all_finite=True, input_name=name)
    except ValueError as exc:
        raise ConfigError(f"invalid {name}: {exc}") from exc


def check_series(x, name: str = "series", min_length: int = 1) -> np.ndarray:
    """Return ``x`` as a finite 1-D float array."""
    arr = np.asarray(getattr(x, "values", x), dtype=float)
    if arr.ndim != 1:
        raise ConfigError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if len(arr) < min_length:
        raise ConfigError(f"{name} needs at least {min_length} samples, got {len(arr)}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} contains non-finite values")
    return arr


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise ConfigError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_positive(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not value > 0:
        raise ConfigError(f"{name} must be > 0, got {value!r}")
    return float(value)


def check_fraction(value, name: str) -> float:
    value = check_positive(value, name)
    if not value < 1:
        raise ConfigError(f"{name} must lie in (0, 1), got {value!r}")
    return value
