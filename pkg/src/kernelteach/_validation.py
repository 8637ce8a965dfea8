"""Small input-validation helpers shared across the package."""

from __future__ import annotations

import numpy as np


def as_vector(x, name: str = "x") -> np.ndarray:
    """Coerce to a finite 1-d float64 array."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-d vector, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_matrix(x, name: str = "X") -> np.ndarray:
    """Coerce to a finite 2-d float64 array; 1-d input becomes a single row."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array, got shape {arr.shape}")
    if arr.shape[1] == 0:
        raise ValueError(f"{name} must have at least one column")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_same_dim(x: np.ndarray, x2: np.ndarray, name: str = "x", name2: str = "x2") -> None:
    if x.shape[-1] != x2.shape[-1]:
        raise ValueError(
            f"dimension mismatch: {name} has dimension {x.shape[-1]}, "
            f"{name2} has dimension {x2.shape[-1]}"
        )


def check_labels(y, name: str = "y") -> np.ndarray:
    """Validate a +/-1 label vector."""
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-d")
    if not np.all(np.isin(arr, (-1, 1))):
        raise ValueError(f"{name} must contain only -1/+1 labels")
    return arr.astype(np.int64)


def require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)
