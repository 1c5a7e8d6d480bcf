"""Input validation helpers shared by the functional API and the estimators."""

from __future__ import annotations

import numpy as np


class DataError(ValueError):
    """Raised when a response matrix, label vector or dataset file is malformed."""


class NumericalError(RuntimeError):
    """Raised when an iterative numerical routine fails to converge."""


def make_rng(seed) -> np.random.Generator:
    """Return a Philox-backed generator.

    Philox is a counter-based generator, so a given integer seed produces the
    same stream on every platform and numpy release that ships it.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def check_responses(Y, *, allow_missing: bool = False, min_workers: int = 1) -> np.ndarray:
    """Validate a worker-by-task response matrix and return it as ``int8``.

    Parameters
    ----------
    Y : array-like of shape (n_workers, n_tasks)
        Entries in {-1, +1}; 0 marks a missing response when ``allow_missing``.
    allow_missing : bool
        Whether zeros are accepted.
    min_workers : int
        Minimum number of rows.
    """
    arr = np.asarray(Y)
    if arr.ndim != 2:
        raise DataError(f"response matrix must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < min_workers or arr.shape[1] < 1:
        raise DataError(
            f"response matrix needs at least {min_workers} workers and 1 task, got {arr.shape}"
        )
    if not np.all(np.isfinite(arr)) or not np.all(arr == np.round(arr)):
        raise DataError("response entries must be integers in {-1, 0, +1}")
    arr = arr.astype(np.int8)
    allowed = (-1, 0, 1) if allow_missing else (-1, 1)
    bad = ~np.isin(arr, allowed)
    if bad.any():
        if not allow_missing and np.any(arr == 0):
            raise DataError("dense matrix required: response matrix contains missing (0) entries")
        raise DataError(f"response entries must lie in {allowed}")
    return arr


def check_labels(y, d: int | None = None, name: str = "labels") -> np.ndarray:
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise DataError(f"{name} must be 1-D")
    if d is not None and arr.shape[0] != d:
        raise DataError(f"{name} has length {arr.shape[0]}, expected {d}")
    if not np.all(np.isin(arr, (-1, 1))):
        raise DataError(f"{name} entries must be -1 or +1")
    return arr.astype(np.int8)


def check_types(k, d: int | None = None, n_types: int | None = None) -> np.ndarray:
    arr = np.asarray(k)
    if arr.ndim != 1:
        raise DataError("type assignment must be 1-D")
    if d is not None and arr.shape[0] != d:
        raise DataError(f"type assignment has length {arr.shape[0]}, expected {d}")
    upper = 2 if n_types is None else n_types
    if arr.size and (not np.all(arr == np.round(arr)) or arr.min() < 1 or arr.max() > upper):
        raise DataError(f"type labels must be integers in 1..{upper}")
    return arr.astype(np.int64)


def check_reliability(r, *, n: int | None = None, interior: bool = True, margin: float | None = None) -> np.ndarray:
    """Validate a reliability vector.

    ``interior=True`` requires every entry strictly inside (-1, 1). With
    ``margin`` set, ``margin <= (1 + r_i) / 2 <= 1 - margin`` is enforced as well.
    """
    arr = np.asarray(r, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DataError("reliability vector must be a non-empty 1-D array")
    if n is not None and arr.shape[0] != n:
        raise DataError(f"reliability vector has length {arr.shape[0]}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise DataError("reliability vector contains non-finite values")
    if interior:
        if np.any(np.abs(arr) >= 1):
            raise DataError("reliabilities must lie strictly inside (-1, 1)")
    elif np.any(np.abs(arr) > 1):
        raise DataError("reliabilities must lie in [-1, 1]")
    if margin is not None:
        if not 0 < margin < 0.5:
            raise DataError("margin must lie in (0, 1/2)")
        p = (1 + arr) / 2
        if np.any(p < margin) or np.any(p > 1 - margin):
            raise DataError(f"reliabilities violate the interior margin {margin}")
    return arr
