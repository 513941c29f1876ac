"""Synthetic data generators and binary PGM (P5) ingestion.

Generators are pure functions of their arguments, seed included. PGM is
the sole image format: trivially parseable, sufficient for desk-scale
experiments; values load scaled to [0, 1].
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import FeatureMap
from .errors import (
    LoocError,
    MalformedHeaderError,
    ShapeMismatchError,
    TruncatedPixelsError,
    UnsupportedMaxvalError,
)


def gen_mixture(
    n: int,
    d: int,
    components: int,
    spread: float,
    seed: int,
    return_centers: bool = False,
):
    """Draw n vectors from isotropic Gaussian clusters in the unit cube.

    Cluster centers are uniform in [0, 1)^d; each sample is a uniformly
    chosen center plus N(0, spread^2) noise.
    """
    if min(n, d, components) < 1 or spread <= 0:
        raise LoocError("n, d, components must be positive and spread > 0")
    rng = np.random.default_rng(seed)
    centers = rng.random((components, d))
    labels = rng.integers(0, components, size=n)
    samples = centers[labels] + spread * rng.standard_normal((n, d))
    samples = samples.astype(np.float32)
    if return_centers:
        return samples, centers.astype(np.float32)
    return samples


def gen_correlated_map(
    h: int, w: int, d: int, smoothness: float, seed: int
) -> FeatureMap:
    """White noise smoothed by a normalized circular box filter.

    The filter radius is round(smoothness); radius 0 returns the raw
    noise. Circular (wrap-around) averaging preserves the mean exactly.
    """
    if min(h, w, d) < 1 or smoothness < 0:
        raise LoocError("h, w, d must be positive and smoothness >= 0")
    rng = np.random.default_rng(seed)
    arr = rng.standard_normal((h, w, d))
    radius = int(round(smoothness))
    if radius > 0:
        for axis in (0, 1):
            acc = np.zeros_like(arr)
            for shift in range(-radius, radius + 1):
                acc += np.roll(arr, shift, axis=axis)
            arr = acc / (2 * radius + 1)
    return FeatureMap(arr.astype(np.float32))


def _read_pgm_tokens(blob: bytes, count: int) -> tuple[list[int], int]:
    # Header tokens are whitespace-separated integers; '#' starts a comment
    # running to end of line. Returns the tokens and the offset just past
    # the single whitespace byte that terminates the last one.
    tokens: list[int] = []
    pos = 0
    while len(tokens) < count:
        if pos >= len(blob):
            raise MalformedHeaderError("unexpected end of header")
        ch = blob[pos : pos + 1]
        if ch == b"#":
            nl = blob.find(b"\n", pos)
            if nl < 0:
                raise MalformedHeaderError("unterminated comment")
            pos = nl + 1
        elif ch.isspace():
            pos += 1
        elif ch.isdigit():
            end = pos
            while end < len(blob) and blob[end : end + 1].isdigit():
                end += 1
            tokens.append(int(blob[pos:end]))
            if len(tokens) == count:
                if end >= len(blob) or not blob[end : end + 1].isspace():
                    raise MalformedHeaderError("missing whitespace after maxval")
                return tokens, end + 1
            pos = end
        else:
            raise MalformedHeaderError(f"unexpected byte {ch!r} in header")
    raise MalformedHeaderError("unreachable")


def load_pgm(path) -> FeatureMap:
    """Load a binary PGM (P5) as an h x w x 1 map scaled to [0, 1]."""
    blob = Path(path).read_bytes()
    if blob[:2] != b"P5":
        raise MalformedHeaderError("only binary PGM (P5) is supported")
    (width, height, maxval), offset = _read_pgm_tokens(blob[2:], 3)
    offset += 2
    if width < 1 or height < 1:
        raise MalformedHeaderError("image dimensions must be positive")
    if not 1 <= maxval <= 65535:
        raise UnsupportedMaxvalError(f"maxval {maxval} outside [1, 65535]")
    two_byte = maxval > 255
    need = width * height * (2 if two_byte else 1)
    raster = blob[offset : offset + need]
    if len(raster) < need:
        raise TruncatedPixelsError(
            f"raster needs {need} bytes, file has {len(raster)}"
        )
    dtype = ">u2" if two_byte else np.uint8
    pixels = np.frombuffer(raster, dtype=dtype).reshape(height, width)
    data = pixels.astype(np.float32) / maxval
    return FeatureMap(data[:, :, None])


def save_pgm(fmap: FeatureMap, path) -> None:
    """Write a single-channel map as 8-bit binary PGM (values clipped to [0, 1])."""
    if fmap.d != 1:
        raise ShapeMismatchError("PGM output requires a single-channel map")
    values = np.clip(fmap.data[:, :, 0], 0.0, 1.0)
    pixels = np.rint(values * 255.0).astype(np.uint8)
    header = f"P5\n{fmap.w} {fmap.h}\n255\n".encode("ascii")
    Path(path).write_bytes(header + pixels.tobytes())


def extract_patches(fmap: FeatureMap, patch: int = 4) -> np.ndarray:
    """Non-overlapping patch x patch blocks flattened row-major, one per row.

    Trailing rows/columns that do not fill a whole patch are dropped.
    """
    if patch < 1:
        raise LoocError("patch size must be positive")
    rows = fmap.h // patch
    cols = fmap.w // patch
    if rows == 0 or cols == 0:
        raise ShapeMismatchError(
            f"map {fmap.h}x{fmap.w} too small for {patch}x{patch} patches"
        )
    cropped = fmap.data[: rows * patch, : cols * patch, :]
    blocks = cropped.reshape(rows, patch, cols, patch, fmap.d)
    return blocks.transpose(0, 2, 1, 3, 4).reshape(rows * cols, patch * patch * fmap.d)
