"""Structural similarity between height maps.

Maps are compared in [0,1] float space. Local statistics come from a
Gaussian window (population covariance), the per-pixel similarity map is
cropped by half the window on every side, and the result is the mean of
what remains. ssim(x, x) is exactly 1 for any valid map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .heightfield import HeightMap, resample


@dataclass(frozen=True)
class SsimParams:
    """Similarity-metric settings; the defaults are the canonical ones."""

    window: int = 11
    window_sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError(f"window must be a positive odd integer, got {self.window}")
        if self.window_sigma <= 0:
            raise ValueError(f"window_sigma must be positive, got {self.window_sigma}")
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError(f"k1 and k2 must be positive, got k1={self.k1}, k2={self.k2}")
        if self.dynamic_range <= 0:
            raise ValueError(f"dynamic_range must be positive, got {self.dynamic_range}")

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "window_sigma": self.window_sigma,
            "k1": self.k1,
            "k2": self.k2,
            "dynamic_range": self.dynamic_range,
        }


def _local_mean(x: np.ndarray, params: SsimParams) -> np.ndarray:
    return gaussian_filter(
        x, sigma=params.window_sigma, radius=(params.window - 1) // 2, mode="reflect"
    )


def ssim(a: HeightMap, b: HeightMap, params: SsimParams = SsimParams()) -> float:
    """Mean local structural similarity of two same-sized maps, in [-1, 1]."""
    if a.values.shape != b.values.shape:
        raise ValueError(
            f"maps must have the same dims, got {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    if min(a.values.shape) < params.window:
        raise ValueError(
            f"maps must be at least {params.window} pixels in each dim for an "
            f"{params.window}-pixel window, got {a.width}x{a.height}"
        )
    x = a.values.astype(np.float64)
    y = b.values.astype(np.float64)
    c1 = (params.k1 * params.dynamic_range) ** 2
    c2 = (params.k2 * params.dynamic_range) ** 2

    ux = _local_mean(x, params)
    uy = _local_mean(y, params)
    vx = _local_mean(x * x, params) - ux * ux
    vy = _local_mean(y * y, params) - uy * uy
    vxy = _local_mean(x * y, params) - ux * uy

    s = ((2.0 * ux * uy + c1) * (2.0 * vxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
    pad = (params.window - 1) // 2
    return float(s[pad:-pad, pad:-pad].mean(dtype=np.float64))


def aligned_ssim(
    a: HeightMap, b: HeightMap, params: SsimParams = SsimParams()
) -> tuple[float, bool]:
    """ssim after aligning dims; the smaller map is bilinearly upsampled.

    Returns (value, resampled) so callers can record whether alignment
    happened. With mixed aspect ratios b is resampled onto a's grid.
    """
    if a.values.shape == b.values.shape:
        return ssim(a, b, params), False
    if a.width * a.height >= b.width * b.height:
        return ssim(a, resample(b, a.width, a.height), params), True
    return ssim(resample(a, b.width, b.height), b, params), True
