"""Parameter-free feature enhancement around the quantizer.

The pipeline upsamples the latent map by an integer factor beta with
channel-wise bilinear interpolation (half-pixel centers, clamped at the
borders), quantizes the enlarged map, and average-pools the dequantized
result back to the original spatial size with non-overlapping beta x beta
windows. At beta=1 every stage is the identity, bit for bit.
"""

from __future__ import annotations

import numpy as np

from .core import Codebook, CodeGrid, FeatureMap, QuantConfig
from .errors import IndivisibleShapeError, LoocError
from .quantizers import looc_dequantize, looc_quantize


def _axis_coords(out_size: int, in_size: int, beta: int):
    # Half-pixel convention: src = (dst + 0.5) / beta - 0.5, clamped.
    src = (np.arange(out_size, dtype=np.float64) + 0.5) / beta - 0.5
    src = np.clip(src, 0.0, in_size - 1)
    lo = np.floor(src).astype(np.int64)
    lo = np.minimum(lo, in_size - 1)
    hi = np.minimum(lo + 1, in_size - 1)
    frac = src - lo
    return lo, hi, frac


def bilinear_upsample(z: FeatureMap, beta: int) -> FeatureMap:
    """Scale the spatial dimensions by beta; channels interpolate independently."""
    if beta < 1:
        raise LoocError("beta must be >= 1")
    if beta == 1:
        return FeatureMap(z.data)
    y0, y1, fy = _axis_coords(z.h * beta, z.h, beta)
    x0, x1, fx = _axis_coords(z.w * beta, z.w, beta)
    data = z.data.astype(np.float64)
    rows0, rows1 = data[y0], data[y1]
    wx = fx[None, :, None]
    wy = fy[:, None, None]
    top = rows0[:, x0] * (1.0 - wx) + rows0[:, x1] * wx
    bot = rows1[:, x0] * (1.0 - wx) + rows1[:, x1] * wx
    out = top * (1.0 - wy) + bot * wy
    return FeatureMap(out.astype(np.float32))


def avg_pool(z: FeatureMap, beta: int) -> FeatureMap:
    """Mean over non-overlapping beta x beta windows, per channel."""
    if beta < 1:
        raise LoocError("beta must be >= 1")
    if beta == 1:
        return FeatureMap(z.data)
    if z.h % beta != 0 or z.w % beta != 0:
        raise IndivisibleShapeError(
            f"map shape {z.h}x{z.w} is not divisible by beta={beta}"
        )
    blocks = z.data.astype(np.float64).reshape(
        z.h // beta, beta, z.w // beta, beta, z.d
    )
    out = blocks.mean(axis=(1, 3))
    return FeatureMap(out.astype(np.float32))


def enhanced_quantize(
    z: FeatureMap, cb: Codebook, cfg: QuantConfig
) -> tuple[FeatureMap, CodeGrid]:
    """Upsample by beta, quantize the enlarged map, pool back to z's shape.

    Returns the smoothed reconstruction (same shape as z) and the
    beta-scaled code grid (the storage artifact).
    """
    up = bilinear_upsample(z, cfg.beta)
    grid = looc_quantize(up, cb, cfg.m, cfg.metric)
    smoothed = avg_pool(looc_dequantize(grid, cb), cfg.beta)
    return smoothed, grid
