"""Input validation helpers shared by the functional API and the estimators."""
from __future__ import annotations

import numpy as np


def is_power_of_two(n) -> bool:
    try:
        n = int(n)
    except (TypeError, ValueError):
        return False
    return n > 0 and (n & (n - 1)) == 0


def check_image(img, *, square=False, power_of_two=False, name="image") -> np.ndarray:
    """Return ``img`` as a finite 2-D float array, raising ``ValueError`` otherwise."""
    arr = np.asarray(img, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if square and arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got {arr.shape[1]}x{arr.shape[0]}")
    if power_of_two and not is_power_of_two(arr.shape[0]):
        raise ValueError(f"{name} side must be a power of two, got {arr.shape[0]}")
    return arr


def check_images(X):
    """Normalise estimator input to a list of 2-D images.

    Accepts a single 2-D array, a 3-D stack ``(n, height, width)`` or any
    sequence of 2-D arrays.
    """
    if isinstance(X, np.ndarray):
        if X.ndim == 2:
            return [check_image(X)]
        if X.ndim == 3:
            return [check_image(x) for x in X]
        raise ValueError(f"expected 2-D image or 3-D stack, got shape {X.shape}")
    return [check_image(x) for x in X]


def wrap_degrees(phi):
    """Wrap angles in degrees into ``[-180, 180)``."""
    return (np.asarray(phi, dtype=float) + 180.0) % 360.0 - 180.0
