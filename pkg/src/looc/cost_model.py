"""Storage and compute accounting, and the bit-exact codecs realizing it.

Costs: the codebook stores 32 * K * d_star bits (float32 entries); each of
the h * w * m indices takes ceil(log2 K) bits (0 when K == 1); quantizing
one map costs h * w * m * K * d_star multiplications (additions omitted).

File formats (frozen, little-endian):
  codebook: magic "LOOC" | version u16=1 | K u32 | dStar u32 | m u32
            | metric u8 (0=L2, 1=Cosine) | 3 reserved bytes
            | K * dStar float32 values
  grid:     magic "LOOG" | version u16=1 | h u32 | w u32 | m u32 | K u32
            | indices packed big-endian at ceil(log2 K) bits each,
              (row, col, segment) order, zero-padded to a byte boundary
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Codebook, CodeGrid, Metric
from .errors import (
    IndexOutOfRangeError,
    LoocError,
    MalformedHeaderError,
    TruncatedStreamError,
)

_CB_MAGIC = b"LOOC"
_GRID_MAGIC = b"LOOG"
_VERSION = 1
_CB_HEADER = struct.Struct("<4sHIIIB3x")
_GRID_HEADER = struct.Struct("<4sHIIII")
_METRIC_CODE = {Metric.L2: 0, Metric.COSINE: 1}
_METRIC_FROM_CODE = {0: Metric.L2, 1: Metric.COSINE}


@dataclass(frozen=True)
class CostReport:
    codebook_bits: int
    index_bits: int
    total_bits: int
    multiplications: int


def bits_per_index(k: int) -> int:
    """ceil(log2 K); a single-entry codebook needs no index bits."""
    if k < 1:
        raise LoocError("K must be positive")
    return (k - 1).bit_length()


def storage_cost(k: int, d_star: int, m: int, h: int, w: int) -> CostReport:
    """Exact bit and multiplication counts for one h x w map."""
    if min(k, d_star, m, h, w) < 1:
        raise LoocError("all cost parameters must be positive")
    codebook_bits = 32 * k * d_star
    index_bits = h * w * m * bits_per_index(k)
    mults = h * w * m * k * d_star
    return CostReport(codebook_bits, index_bits, codebook_bits + index_bits, mults)


def pack_indices(grid: CodeGrid) -> bytes:
    """Pack grid indices big-endian at ceil(log2 K) bits each.

    Flat (row, col, segment) order, zero-padded to a byte boundary. With
    K == 1 the payload is empty.
    """
    bits = bits_per_index(grid.codebook_size)
    if bits == 0:
        return b""
    flat = grid.flat().astype(np.uint32)
    shifts = np.arange(bits - 1, -1, -1, dtype=np.uint32)
    bitplane = ((flat[:, None] >> shifts) & 1).astype(np.uint8)
    return np.packbits(bitplane.reshape(-1)).tobytes()


def unpack_indices(data: bytes, h: int, w: int, m: int, k: int) -> CodeGrid:
    """Inverse of pack_indices; validates length and index range."""
    bits = bits_per_index(k)
    count = h * w * m
    if bits == 0:
        return CodeGrid(np.zeros((h, w, m), dtype=np.int32), codebook_size=k)
    need = (count * bits + 7) // 8
    if len(data) < need:
        raise TruncatedStreamError(
            f"need {need} bytes for {count} indices at {bits} bits, got {len(data)}"
        )
    raw = np.frombuffer(data[:need], dtype=np.uint8)
    bitplane = np.unpackbits(raw)[: count * bits].reshape(count, bits)
    weights = (1 << np.arange(bits - 1, -1, -1, dtype=np.int64))
    values = bitplane.astype(np.int64) @ weights
    if (values >= k).any():
        raise IndexOutOfRangeError(
            f"packed stream contains index {int(values.max())} >= K={k}"
        )
    return CodeGrid(values.reshape(h, w, m).astype(np.int32), codebook_size=k)


def save_codebook(
    path, cb: Codebook, m: int = 1, metric: Metric = Metric.L2
) -> None:
    header = _CB_HEADER.pack(
        _CB_MAGIC, _VERSION, cb.k, cb.d_star, m, _METRIC_CODE[Metric(metric)]
    )
    payload = cb.vectors.astype("<f4").tobytes()
    Path(path).write_bytes(header + payload)


def load_codebook(path) -> tuple[Codebook, int, Metric]:
    """Read a codebook file; usage counters start fresh (they are not stored)."""
    blob = Path(path).read_bytes()
    if len(blob) < _CB_HEADER.size:
        raise TruncatedStreamError("codebook file shorter than its header")
    magic, version, k, d_star, m, metric_code = _CB_HEADER.unpack_from(blob)
    if magic != _CB_MAGIC:
        raise MalformedHeaderError(f"bad codebook magic {magic!r}")
    if version != _VERSION:
        raise MalformedHeaderError(f"unsupported codebook version {version}")
    if metric_code not in _METRIC_FROM_CODE:
        raise MalformedHeaderError(f"unknown metric code {metric_code}")
    need = _CB_HEADER.size + 4 * k * d_star
    if len(blob) < need:
        raise TruncatedStreamError(
            f"codebook payload truncated: need {need} bytes, got {len(blob)}"
        )
    vectors = np.frombuffer(
        blob, dtype="<f4", count=k * d_star, offset=_CB_HEADER.size
    ).reshape(k, d_star)
    return Codebook(vectors=vectors), m, _METRIC_FROM_CODE[metric_code]


def save_grid(path, grid: CodeGrid) -> None:
    header = _GRID_HEADER.pack(
        _GRID_MAGIC, _VERSION, grid.h, grid.w, grid.m, grid.codebook_size
    )
    Path(path).write_bytes(header + pack_indices(grid))


def load_grid(path) -> CodeGrid:
    blob = Path(path).read_bytes()
    if len(blob) < _GRID_HEADER.size:
        raise TruncatedStreamError("grid file shorter than its header")
    magic, version, h, w, m, k = _GRID_HEADER.unpack_from(blob)
    if magic != _GRID_MAGIC:
        raise MalformedHeaderError(f"bad grid magic {magic!r}")
    if version != _VERSION:
        raise MalformedHeaderError(f"unsupported grid version {version}")
    if min(h, w, m, k) < 1:
        raise MalformedHeaderError("grid header has non-positive dimensions")
    return unpack_indices(blob[_GRID_HEADER.size :], h, w, m, k)
