"""Small input validation helpers shared by the numerical kernels."""

import numpy as np


def check_points(X, *, name="X"):
    """Return ``X`` as a float array of shape (n, 3).

    A single point of shape (3,) is promoted to (1, 3).  Non-finite entries
    are rejected.
    """
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"{name} must have shape (n, 3), got {np.shape(X)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_point(x, *, name="x"):
    arr = np.asarray(x, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_tolerance(tol, *, upper=1.0, name="tol"):
    tol = float(tol)
    if not (0.0 < tol < upper):
        raise ValueError(f"{name} must lie in (0, {upper}), got {tol}")
    return tol
