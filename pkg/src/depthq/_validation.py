"""Input validation helpers in the style of ``sklearn.utils.validation``."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array

from .exceptions import DimensionError, InputError


def check_dataset(values, name: str = "data", min_rows: int = 1) -> np.ndarray:
    """Return ``values`` as a finite float64 matrix of shape (m, d).

    One-dimensional input is read as a single column, so ``[1, 2, 3]`` is
    three univariate observations.
    """
    try:
        arr = np.asarray(values, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        arr = check_array(arr, dtype=np.float64, ensure_2d=True,
                          ensure_min_samples=min_rows, input_name=name)
    except ValueError as exc:
        raise InputError(f"{name}: {exc}") from exc
    return arr


def check_point(values, name: str = "point") -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0 or not np.all(np.isfinite(arr)):
        raise InputError(f"{name} must be a nonempty finite vector")
    return arr


def check_same_dim(a: np.ndarray, b: np.ndarray, names=("queries", "sample")) -> int:
    if a.shape[1] != b.shape[1]:
        raise DimensionError(
            f"dimension mismatch: {names[0]} has d={a.shape[1]}, "
            f"{names[1]} has d={b.shape[1]}")
    return a.shape[1]
