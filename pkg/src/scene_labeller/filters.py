"""Separable Gaussian filtering with replicated borders."""

import math

import numpy as np
from scipy import ndimage


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D kernel of radius ``ceil(3 * sigma)``."""
    radius = max(1, math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def blur(arr: np.ndarray, sigma: float) -> np.ndarray:
    """Blur the two leading (spatial) axes of a float array."""
    arr = np.asarray(arr, dtype=np.float64)
    if sigma <= 0:
        return arr.copy()
    k = gaussian_kernel(sigma)
    out = ndimage.correlate1d(arr, k, axis=0, mode="nearest")
    return ndimage.correlate1d(out, k, axis=1, mode="nearest")
