"""The three quantization schemes over feature maps.

* vanilla VQ: one codebook, whole vectors (m = 1);
* product quantization: m contiguous segments, one distinct sub-codebook
  per segment;
* shared-codebook compositional quantization: m segments, one codebook and
  one quantizer serving every segment.

All three map a FeatureMap to a CodeGrid and back; the grid layout is
scheme-agnostic (the codebook multiplicity lives in the quantizer).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .codebook import fit_codebook
from .core import Codebook, CodeGrid, FeatureMap, Metric
from .errors import (
    DimensionMismatchError,
    IndexOutOfRangeError,
    IndivisibleDimensionError,
    LoocError,
)


@dataclass(frozen=True)
class PqCodebookSet:
    """m sub-codebooks sharing one codevector dimension (one per segment)."""

    sub_codebooks: tuple[Codebook, ...]

    def __post_init__(self) -> None:
        if not self.sub_codebooks:
            raise LoocError("need at least one sub-codebook")
        object.__setattr__(self, "sub_codebooks", tuple(self.sub_codebooks))
        widths = {cb.d_star for cb in self.sub_codebooks}
        if len(widths) != 1:
            raise DimensionMismatchError(
                f"sub-codebooks disagree on codevector dimension: {sorted(widths)}"
            )

    @property
    def m(self) -> int:
        return len(self.sub_codebooks)

    @property
    def d_star(self) -> int:
        return self.sub_codebooks[0].d_star


def _segments(z: FeatureMap, m: int) -> np.ndarray:
    if z.d % m != 0:
        raise IndivisibleDimensionError(f"d={z.d} is not divisible by m={m}")
    return z.data.reshape(z.h * z.w * m, z.d // m)


def vq_quantize(z: FeatureMap, cb: Codebook, metric: Metric = Metric.L2) -> CodeGrid:
    """Replace each location's vector with its nearest codevector index."""
    if cb.d_star != z.d:
        raise DimensionMismatchError(
            f"codebook dimension {cb.d_star} != feature dimension {z.d}"
        )
    return looc_quantize(z, cb, 1, metric)


def looc_quantize(
    z: FeatureMap, cb: Codebook, m: int, metric: Metric = Metric.L2
) -> CodeGrid:
    """Quantize every length-d/m segment against one shared codebook.

    At m=1 this is exactly vanilla VQ.
    """
    if m < 1:
        raise LoocError("m must be a positive integer")
    segs = _segments(z, m)
    if cb.d_star != segs.shape[1]:
        raise DimensionMismatchError(
            f"codebook dimension {cb.d_star} != segment dimension {segs.shape[1]}"
        )
    idx, _ = kernels.assign(segs, cb.vectors, metric)
    return CodeGrid(indices=idx.reshape(z.h, z.w, m), codebook_size=cb.k)


def looc_dequantize(grid: CodeGrid, cb: Codebook) -> FeatureMap:
    """Concatenate the selected codevectors per location, in segment order."""
    flat = grid.flat()
    if int(flat.max()) >= cb.k:
        raise IndexOutOfRangeError(
            f"grid references index {int(flat.max())} but codebook has K={cb.k}"
        )
    data = cb.vectors[flat].reshape(grid.h, grid.w, grid.m * cb.d_star)
    return FeatureMap(data)


def pq_quantize(
    z: FeatureMap, cbs: PqCodebookSet, metric: Metric = Metric.L2
) -> CodeGrid:
    """Quantize segment q against sub-codebook q only."""
    segs = _segments(z, cbs.m)
    if cbs.d_star != segs.shape[1]:
        raise DimensionMismatchError(
            f"sub-codebook dimension {cbs.d_star} != segment dimension {segs.shape[1]}"
        )
    per_loc = segs.reshape(z.h * z.w, cbs.m, cbs.d_star)
    widest = max(cb.k for cb in cbs.sub_codebooks)
    out = np.empty((z.h * z.w, cbs.m), dtype=np.int32)
    for q, cb in enumerate(cbs.sub_codebooks):
        idx, _ = kernels.assign(np.ascontiguousarray(per_loc[:, q, :]), cb.vectors, metric)
        out[:, q] = idx
    return CodeGrid(indices=out.reshape(z.h, z.w, cbs.m), codebook_size=widest)


def pq_dequantize(grid: CodeGrid, cbs: PqCodebookSet) -> FeatureMap:
    """Reconstruct by concatenating per-segment sub-codebook entries."""
    if grid.m != cbs.m:
        raise DimensionMismatchError(
            f"grid has m={grid.m} segments, codebook set has {cbs.m}"
        )
    parts = np.empty((grid.h * grid.w, cbs.m, cbs.d_star), dtype=np.float32)
    flat = grid.indices.reshape(grid.h * grid.w, grid.m)
    for q, cb in enumerate(cbs.sub_codebooks):
        col = flat[:, q]
        if int(col.max()) >= cb.k:
            raise IndexOutOfRangeError(
                f"segment {q} references index {int(col.max())} but K_q={cb.k}"
            )
        parts[:, q, :] = cb.vectors[col]
    data = parts.reshape(grid.h, grid.w, cbs.m * cbs.d_star)
    return FeatureMap(data)


def fit_pq_codebooks(
    vectors: np.ndarray,
    m: int,
    k: int,
    *,
    seed: int = 0,
    metric: Metric = Metric.L2,
    rounds: int = 25,
    reactivate: bool = True,
) -> PqCodebookSet:
    """Fit one sub-codebook per contiguous segment of the training vectors."""
    arr = np.ascontiguousarray(vectors, dtype=np.float32)
    if arr.ndim != 2:
        raise DimensionMismatchError("training vectors must be 2-d (n, d)")
    if arr.shape[1] % m != 0:
        raise IndivisibleDimensionError(
            f"d={arr.shape[1]} is not divisible by m={m}"
        )
    ds = arr.shape[1] // m
    subs = []
    for q in range(m):
        seg = np.ascontiguousarray(arr[:, q * ds : (q + 1) * ds])
        cb, _ = fit_codebook(
            seg, k, seed=seed + q, metric=metric, rounds=rounds, reactivate=reactivate
        )
        subs.append(cb)
    return PqCodebookSet(tuple(subs))


def effective_capacity(k: int, m: int) -> int:
    """K**m, the number of distinct concatenations m slots can express.

    Exact integer arithmetic; paper-scale settings overflow 64 bits.
    """
    if k < 1 or m < 1:
        raise LoocError("K and m must be positive")
    return k**m
