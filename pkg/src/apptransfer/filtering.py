"""Separable Gaussian filtering and the difference-of-Gaussians edge loss.

All filters use edge-clamped (replicate) boundaries. The loss gradient is
the exact adjoint of the replicate-padded convolution, so it matches
finite differences to rounding error even at image borders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

LUMA_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])


@dataclass
class GaussianKernel:
    sigma: float
    taps: np.ndarray

    @property
    def radius(self) -> int:
        return len(self.taps) // 2


def gaussian_kernel(sigma: float) -> GaussianKernel:
    """Normalized 1-D Gaussian taps with radius ceil(3*sigma)."""
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    radius = math.ceil(3.0 * sigma)
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-(t**2) / (2.0 * sigma**2))
    taps /= taps.sum()
    return GaussianKernel(sigma=sigma, taps=taps)


def grayscale(rgb: np.ndarray) -> np.ndarray:
    """Rec. 709 luma of an (H, W, 3) image."""
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.ndim != 3 or rgb.shape[-1] != 3:
        raise ValueError("expected an (H, W, 3) rgb image")
    return rgb @ LUMA_WEIGHTS


def blur(image: np.ndarray, kernel: GaussianKernel) -> np.ndarray:
    """Separable Gaussian blur with replicate boundaries."""
    out = np.asarray(image, dtype=np.float64)
    for axis in range(2):
        out = ndimage.correlate1d(out, kernel.taps, axis=axis, mode="nearest")
    return out


def _adjoint_axis(arr: np.ndarray, taps: np.ndarray, axis: int) -> np.ndarray:
    # transpose of replicate-pad followed by valid correlation: full
    # correlation, then fold the pad rows back onto the border pixels
    radius = len(taps) // 2
    moved = np.moveaxis(np.asarray(arr, dtype=np.float64), axis, 0)
    n = moved.shape[0]
    padded = np.zeros((n + 2 * radius,) + moved.shape[1:], dtype=np.float64)
    padded[radius : radius + n] = moved
    z = ndimage.correlate1d(padded, taps, axis=0, mode="constant", cval=0.0)
    out = z[radius : radius + n].copy()
    if radius > 0:
        out[0] += z[:radius].sum(axis=0)
        out[-1] += z[radius + n :].sum(axis=0)
    return np.moveaxis(out, 0, axis)


def blur_adjoint(image: np.ndarray, kernel: GaussianKernel) -> np.ndarray:
    """Adjoint of ``blur`` (symmetric taps assumed)."""
    out = image
    for axis in range(2):
        out = _adjoint_axis(out, kernel.taps, axis)
    return out


def dog_loss(
    current: np.ndarray,
    target: np.ndarray,
    sigma1: float = 1.0,
    sigma2: float = 1.6,
) -> tuple[float, np.ndarray]:
    """Mean L1 difference between the two differently blurred grayscale
    images, and its gradient with respect to `current`.

    Returns (value, grad) where grad has the shape of `current`.
    """
    current = np.asarray(current, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if current.ndim != 2 or target.ndim != 2:
        raise ValueError("dog_loss expects grayscale (H, W) images")
    if current.shape != target.shape:
        raise ValueError(
            f"size mismatch: current {current.shape} vs target {target.shape}"
        )
    k1 = gaussian_kernel(sigma1)
    k2 = gaussian_kernel(sigma2)
    diff = blur(current, k1) - blur(target, k2)
    value = float(np.abs(diff).mean())
    grad = blur_adjoint(np.sign(diff) / diff.size, k1)
    return value, grad
