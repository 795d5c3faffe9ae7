"""Input validation helpers shared by the public entry points."""

import os

import numpy as np

from .exceptions import DenseCapExceeded, DimensionMismatch

DEFAULT_DENSE_CAP = 4096
DENSE_CAP_ENV = "TOEPEXP_DENSE_CAP"


def dense_cap():
    """Largest n for which dense n x n materialization is allowed.

    Reads ``TOEPEXP_DENSE_CAP`` on every call so the CLI and tests can
    override it without reloading the package.
    """
    raw = os.environ.get(DENSE_CAP_ENV)
    if raw is None:
        return DEFAULT_DENSE_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"{DENSE_CAP_ENV} must be an integer, got {raw!r}")
    if cap < 1:
        raise ValueError(f"{DENSE_CAP_ENV} must be positive, got {cap}")
    return cap


def check_dense_cap(n, what="matrix"):
    cap = dense_cap()
    if n > cap:
        raise DenseCapExceeded(
            f"refusing to materialize a dense {n}x{n} {what}; dense cap is {cap} "
            f"(set {DENSE_CAP_ENV} to raise it)")


def check_vector(v, n=None, name="v"):
    """Return `v` as a 1-D complex128 array, optionally of length `n`."""
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise DimensionMismatch(f"{name} has length {arr.shape[0]}, expected {n}")
    return arr


def check_block(V, n, name="V"):
    """Accept a vector of length n or an (n, k) block; return 2-D complex."""
    arr = np.asarray(V, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] != n:
        raise DimensionMismatch(f"{name} must have {n} rows, got shape {np.shape(V)}")
    return arr


def check_positive(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value}")
    return value
