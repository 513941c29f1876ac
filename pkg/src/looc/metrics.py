"""Reconstruction-quality and codebook-statistics measurements.

SSIM uses uniform (box) windows over valid positions with population
statistics and the standard stabilizers C1=(0.01*peak)^2, C2=(0.03*peak)^2;
this variant is frozen here so numbers are comparable across runs.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .core import CodeGrid, FeatureMap
from .errors import InconsistentGridsError, ShapeMismatchError, WindowTooLargeError


def _pair(a: FeatureMap, b: FeatureMap) -> tuple[np.ndarray, np.ndarray]:
    if a.data.shape != b.data.shape:
        raise ShapeMismatchError(
            f"shape mismatch: {a.data.shape} vs {b.data.shape}"
        )
    return a.data.astype(np.float64), b.data.astype(np.float64)


def mse(a: FeatureMap, b: FeatureMap) -> float:
    """Mean squared elementwise difference."""
    x, y = _pair(a, b)
    return float(((x - y) ** 2).mean())


def l1(a: FeatureMap, b: FeatureMap) -> float:
    """Mean absolute elementwise difference."""
    x, y = _pair(a, b)
    return float(np.abs(x - y).mean())


def psnr(a: FeatureMap, b: FeatureMap, peak: float = 1.0) -> float:
    """10 * log10(peak^2 / mse) in dB; +inf when the maps are identical."""
    if peak <= 0:
        raise ShapeMismatchError("peak must be positive")
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / err)


def _as_image(img) -> np.ndarray:
    if isinstance(img, FeatureMap):
        if img.d != 1:
            raise ShapeMismatchError("ssim expects a single-channel image")
        return img.data[:, :, 0].astype(np.float64)
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeMismatchError("ssim expects a 2-d grayscale image")
    return arr


def ssim(a, b, window_size: int = 7, peak: float = 1.0) -> float:
    """Mean local structural similarity with uniform windows.

    Local means/variances/covariance are computed per valid window
    position (no padding) with population normalization.
    """
    x = _as_image(a)
    y = _as_image(b)
    if x.shape != y.shape:
        raise ShapeMismatchError(f"shape mismatch: {x.shape} vs {y.shape}")
    if window_size < 3 or window_size % 2 == 0:
        raise WindowTooLargeError("window size must be odd and >= 3")
    if window_size > min(x.shape):
        raise WindowTooLargeError(
            f"window {window_size} exceeds image size {x.shape}"
        )
    win = window_size
    xs = np.lib.stride_tricks.sliding_window_view(x, (win, win))
    ys = np.lib.stride_tricks.sliding_window_view(y, (win, win))
    mx = xs.mean(axis=(2, 3))
    my = ys.mean(axis=(2, 3))
    vx = (xs * xs).mean(axis=(2, 3)) - mx * mx
    vy = (ys * ys).mean(axis=(2, 3)) - my * my
    cov = (xs * ys).mean(axis=(2, 3)) - mx * my
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    num = (2.0 * mx * my + c1) * (2.0 * cov + c2)
    den = (mx * mx + my * my + c1) * (vx + vy + c2)
    return float((num / den).mean())


def _check_grids(grids: Sequence[CodeGrid], k: int):
    if not grids:
        raise InconsistentGridsError("need at least one grid")
    m = grids[0].m
    for g in grids:
        if g.m != m:
            raise InconsistentGridsError("grids disagree on segment count m")
        if g.codebook_size != k:
            raise InconsistentGridsError(
                f"grid built for K={g.codebook_size}, expected {k}"
            )
    return m


def segment_usage(grids: Sequence[CodeGrid], k: int) -> np.ndarray:
    """Per-segment fraction of the K codevectors used at least once."""
    m = _check_grids(grids, k)
    used = np.zeros((m, k), dtype=bool)
    for g in grids:
        flat = g.indices.reshape(-1, m)
        for q in range(m):
            used[q, np.unique(flat[:, q])] = True
    return used.sum(axis=1) / k


def sharing_histogram(grids: Sequence[CodeGrid], k: int) -> np.ndarray:
    """entry[n] = fraction of codevectors used by at least n distinct segments.

    entry[0] is 1 by convention and the sequence is non-increasing.
    """
    m = _check_grids(grids, k)
    used = np.zeros((m, k), dtype=bool)
    for g in grids:
        flat = g.indices.reshape(-1, m)
        for q in range(m):
            used[q, np.unique(flat[:, q])] = True
    spread = used.sum(axis=0)  # segments using each codevector
    out = np.empty(m + 1, dtype=np.float64)
    for n in range(m + 1):
        out[n] = (spread >= n).sum() / k
    return out


def quality_report(
    original: FeatureMap,
    reconstruction: FeatureMap,
    grid: CodeGrid,
    k: int,
    peak: float = 1.0,
    ssim_window: int = 7,
) -> dict:
    """Flat stats dict with the documented keys.

    ``ssim`` is null for multi-channel maps; ``psnr_db`` is null when the
    reconstruction is exact (the +inf sentinel has no JSON encoding).
    """
    seg = segment_usage([grid], k)
    share = sharing_histogram([grid], k)
    p = psnr(original, reconstruction, peak)
    s = None
    if original.d == 1 and ssim_window <= min(original.h, original.w):
        s = ssim(original, reconstruction, ssim_window, peak)
    return {
        "mse": mse(original, reconstruction),
        "l1": l1(original, reconstruction),
        "psnr_db": None if math.isinf(p) else p,
        "ssim": s,
        "usage": float(len(np.unique(grid.flat())) / k),
        "per_segment_usage": [float(v) for v in seg],
        "sharing": [float(v) for v in share],
    }


def stats_lines(report: dict) -> list[str]:
    """Render a flat report as plain-text key=value lines."""
    lines = []
    for key, value in report.items():
        if isinstance(value, list):
            rendered = ",".join(repr(float(v)) for v in value)
        elif value is None:
            rendered = "inf" if key == "psnr_db" else "none"
        elif isinstance(value, float):
            rendered = repr(value)
        else:
            rendered = str(value)
        lines.append(f"{key}={rendered}")
    return lines
