"""Shared numeric containers: feature maps, codebooks, code grids, config.

All containers are immutable after construction (their arrays are marked
read-only), so they can be shared freely across threads. Storage precision
is float32 throughout; higher-precision arithmetic happens transiently
inside operations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    IndexOutOfRangeError,
    IndivisibleDimensionError,
    LengthMismatchError,
    LoocError,
    NonFiniteInputError,
)

log = logging.getLogger(__name__)


class Metric(str, Enum):
    """Similarity used by nearest-codevector search."""

    L2 = "l2"
    COSINE = "cosine"


def _frozen_f32(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float32, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class FeatureMap:
    """Dense h x w x d latent grid, row-major (row, col, channel), float32.

    ``data`` is always a fresh read-only copy of the input, so a FeatureMap
    never aliases caller memory.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim != 3:
            raise LengthMismatchError(
                f"feature map must be 3-d (h, w, d), got shape {arr.shape}"
            )
        if arr.size == 0:
            raise LengthMismatchError("feature map dimensions must be positive")
        if not np.isfinite(arr).all():
            raise NonFiniteInputError("feature map contains NaN or Inf")
        object.__setattr__(self, "data", _frozen_f32(arr))

    @property
    def h(self) -> int:
        return self.data.shape[0]

    @property
    def w(self) -> int:
        return self.data.shape[1]

    @property
    def d(self) -> int:
        return self.data.shape[2]

    def flat(self) -> np.ndarray:
        """Row-major flat view of length h*w*d (the wire layout)."""
        return self.data.reshape(-1)


def featuremap_new(h: int, w: int, d: int, data) -> FeatureMap:
    """Build a FeatureMap from a flat row-major buffer of length h*w*d."""
    if h < 1 or w < 1 or d < 1:
        raise LengthMismatchError("h, w, d must be positive")
    arr = np.asarray(data, dtype=np.float32).reshape(-1)
    if arr.size != h * w * d:
        raise LengthMismatchError(
            f"expected {h * w * d} values for {h}x{w}x{d}, got {arr.size}"
        )
    return FeatureMap(arr.reshape(h, w, d))


@dataclass(frozen=True)
class Codebook:
    """K codevectors of dimension d_star plus usage statistics.

    ``usage_count`` holds lifetime hit counts, ``usage_ema`` an exponential
    moving average of hits per update round. Both are carried along
    immutably; updates produce new Codebook instances.
    """

    vectors: np.ndarray
    usage_count: np.ndarray = field(default=None)  # type: ignore[assignment]
    usage_ema: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        vec = np.asarray(self.vectors)
        if vec.ndim != 2 or vec.size == 0:
            raise LengthMismatchError(
                f"codebook vectors must be 2-d (K, d_star), got shape {vec.shape}"
            )
        if not np.isfinite(vec).all():
            raise NonFiniteInputError("codebook contains NaN or Inf")
        k = vec.shape[0]
        count = self.usage_count if self.usage_count is not None else np.zeros(k, np.int64)
        ema = self.usage_ema if self.usage_ema is not None else np.zeros(k, np.float64)
        count = np.array(count, dtype=np.int64, copy=True)
        ema = np.array(ema, dtype=np.float64, copy=True)
        if count.shape != (k,) or ema.shape != (k,):
            raise LengthMismatchError("usage statistics must have length K")
        if (count < 0).any() or (ema < 0).any():
            raise LoocError("usage statistics must be non-negative")
        count.flags.writeable = False
        ema.flags.writeable = False
        object.__setattr__(self, "vectors", _frozen_f32(vec))
        object.__setattr__(self, "usage_count", count)
        object.__setattr__(self, "usage_ema", ema)

    @property
    def k(self) -> int:
        return self.vectors.shape[0]

    @property
    def d_star(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class CodeGrid:
    """h x w x m grid of codebook indices, row-major (row, col, segment).

    ``codebook_size`` records the K the indices refer to; every index is
    validated to lie in [0, K).
    """

    indices: np.ndarray
    codebook_size: int

    def __post_init__(self) -> None:
        arr = np.asarray(self.indices)
        if arr.ndim != 3 or arr.size == 0:
            raise LengthMismatchError(
                f"code grid must be 3-d (h, w, m), got shape {arr.shape}"
            )
        if self.codebook_size < 1:
            raise LoocError("codebook_size must be positive")
        arr = np.array(arr, dtype=np.int32, copy=True)
        if (arr < 0).any() or (arr >= self.codebook_size).any():
            raise IndexOutOfRangeError(
                f"grid indices must lie in [0, {self.codebook_size})"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "indices", arr)

    @property
    def h(self) -> int:
        return self.indices.shape[0]

    @property
    def w(self) -> int:
        return self.indices.shape[1]

    @property
    def m(self) -> int:
        return self.indices.shape[2]

    def flat(self) -> np.ndarray:
        """Row-major flat view in (row, col, segment) order (the wire layout)."""
        return self.indices.reshape(-1)


@dataclass(frozen=True)
class QuantConfig:
    """Quantizer settings: segments per vector, interpolation scale, metric.

    ``beta`` is an integer in [1, 8]; values above 4 are legal but logged,
    since spatial correlation typically no longer supports them. Wherever
    the config is applied, the feature dimension d must be divisible by m
    (each codevector then has dimension d/m).
    """

    m: int = 1
    beta: int = 1
    metric: Metric = Metric.L2
    mu: float = 0.25

    def __post_init__(self) -> None:
        if self.m < 1:
            raise LoocError("m must be a positive integer")
        if not isinstance(self.beta, int) or isinstance(self.beta, bool):
            raise LoocError("beta must be an integer")
        if not 1 <= self.beta <= 8:
            raise LoocError("beta must lie in [1, 8]")
        if self.beta > 4:
            log.warning("beta=%d exceeds the evaluated range {1..4}", self.beta)
        if not isinstance(self.metric, Metric):
            object.__setattr__(self, "metric", Metric(self.metric))
        if self.mu < 0:
            raise LoocError("mu must be non-negative")

    def d_star(self, d: int) -> int:
        if d % self.m != 0:
            raise IndivisibleDimensionError(f"d={d} is not divisible by m={self.m}")
        return d // self.m


def split_vector(v, m: int) -> list[np.ndarray]:
    """Split a length-d vector into m contiguous segments of length d/m.

    Segment q covers elements [(q-1)*d/m, q*d/m); concatenating the output
    reproduces the input.
    """
    arr = np.asarray(v, dtype=np.float32).reshape(-1)
    if m < 1:
        raise LoocError("m must be a positive integer")
    if arr.size % m != 0:
        raise IndivisibleDimensionError(
            f"vector length {arr.size} is not divisible by m={m}"
        )
    step = arr.size // m
    return [arr[q * step : (q + 1) * step].copy() for q in range(m)]
