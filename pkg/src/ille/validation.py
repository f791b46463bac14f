"""Input validation helpers.

These mirror the role of :mod:`sklearn.utils.validation` but raise the
package's own exception types so callers can tell bad data apart from bad
hyperparameters.
"""

import numbers

import numpy as np

from .exceptions import ParameterError, ShapeError, ValidationError

PSD_RTOL = 1e-8
SYMMETRY_RTOL = 1e-12


def check_array(X, name="X", ndim=2, allow_empty=False):
    """Convert ``X`` to a float64 ndarray and reject NaN/Inf."""
    try:
        arr = np.asarray(X, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} is not numeric: {exc}") from exc
    if ndim is not None and arr.ndim != ndim:
        raise ShapeError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if not allow_empty and arr.size == 0:
        raise ValidationError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains NaN or Inf")
    return arr


def check_square(A, name="matrix"):
    A = check_array(A, name=name)
    if A.shape[0] != A.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {A.shape}")
    return A


def check_symmetric(A, name="matrix", rtol=SYMMETRY_RTOL):
    """Return ``A`` if symmetric within ``rtol * max|A|``, else raise."""
    A = check_square(A, name=name)
    scale = max(np.abs(A).max(), np.finfo(float).tiny)
    if np.abs(A - A.T).max() > rtol * scale:
        raise ValidationError(f"{name} is not symmetric")
    return A


def check_nonnegative(A, name="matrix", reason=None):
    if np.any(A < 0):
        i, j = np.unravel_index(np.argmin(A), A.shape)
        msg = f"{name} has negative entry {A[i, j]:.3g} at ({i},{j})"
        if reason:
            msg += f"; {reason}"
        raise ValidationError(msg)
    return A


def check_same_shape(A, B, names=("A", "B")):
    if A.shape != B.shape:
        raise ShapeError(f"{names[0]} has shape {A.shape} but {names[1]} has shape {B.shape}")


def check_positive(value, name, strict=True):
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ParameterError(f"{name} must be a finite real number, got {value!r}")
    if strict and value <= 0:
        raise ParameterError(f"{name} must be > 0, got {value!r}")
    if not strict and value < 0:
        raise ParameterError(f"{name} must be >= 0, got {value!r}")
    return float(value)


def check_int_range(value, name, low, high=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ParameterError(f"{name} must be an integer, got {value!r}")
    if value < low or (high is not None and value > high):
        bound = f"[{low}, {high}]" if high is not None else f">= {low}"
        raise ParameterError(f"{name} must be in {bound}, got {value}")
    return int(value)


def check_choice(value, name, choices):
    if value not in choices:
        raise ParameterError(f"{name} must be one of {sorted(choices)}, got {value!r}")
    return value


def check_labels(labels, name="labels"):
    """Return an integer label vector; rejects floats with fractional parts."""
    arr = np.asarray(labels)
    if arr.ndim != 1:
        arr = arr.reshape(-1) if arr.ndim == 2 and 1 in arr.shape else arr
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise ValidationError(f"{name} must be integers")
    elif arr.dtype.kind not in "iub":
        raise ValidationError(f"{name} must be integers, got dtype {arr.dtype}")
    return arr.astype(np.int64)
