"""Backend selection and dispatch for the nearest-codevector scan.

The compiled extension is used when importable, the numpy fallback
otherwise; both yield bitwise identical results. ``use_backend`` forces a
backend temporarily (benchmarks, equivalence tests), and
``count_multiplications`` instruments the scan's multiply count, which by
construction equals rows * K * d_star per call (norm computations under
the cosine metric are not counted, matching the cost model's convention
of counting only codevector-comparison multiplies).
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from . import _kernels_py
from .core import Metric
from .errors import DimensionMismatchError, LoocError, ZeroVectorCosineError

try:
    from . import _kernels
except ImportError:  # pragma: no cover - depends on build environment
    _kernels = None

_forced: str | None = None


def available_backends() -> tuple[str, ...]:
    return ("compiled", "python") if _kernels is not None else ("python",)


def get_backend() -> str:
    if _forced is not None:
        return _forced
    return "compiled" if _kernels is not None else "python"


@contextmanager
def use_backend(name: str):
    """Force a backend within the context ("compiled" or "python")."""
    global _forced
    if name not in available_backends():
        raise LoocError(f"backend {name!r} not available (have {available_backends()})")
    prev = _forced
    _forced = name
    try:
        yield
    finally:
        _forced = prev


@dataclass
class MultiplyCounter:
    total: int = 0


_counters: list[MultiplyCounter] = []


@contextmanager
def count_multiplications():
    """Track multiplications performed by assignment scans in this context."""
    counter = MultiplyCounter()
    _counters.append(counter)
    try:
        yield counter
    finally:
        _counters.remove(counter)


def assign(segments, codes, metric: Metric = Metric.L2):
    """Nearest codevector per row of ``segments``.

    Returns (indices int32, distances float64). The distance is unsquared
    L2 under Metric.L2 and (1 - cosine similarity) under Metric.COSINE.
    Ties break to the lowest index.
    """
    segs = np.ascontiguousarray(segments, dtype=np.float32)
    cds = np.ascontiguousarray(codes, dtype=np.float32)
    if segs.ndim != 2 or cds.ndim != 2:
        raise DimensionMismatchError("segments and codes must be 2-d arrays")
    if segs.shape[1] != cds.shape[1]:
        raise DimensionMismatchError(
            f"segment dimension {segs.shape[1]} != codevector dimension {cds.shape[1]}"
        )
    if cds.shape[0] == 0:
        raise DimensionMismatchError("codebook is empty")
    metric = Metric(metric)
    impl = _kernels if get_backend() == "compiled" else _kernels_py
    if _counters:
        mults = segs.shape[0] * cds.shape[0] * segs.shape[1]
        for counter in _counters:
            counter.total += mults
    if metric is Metric.L2:
        idx, dist2 = impl.assign_l2(segs, cds)
        return idx, np.sqrt(dist2)
    if not cds.any(axis=1).all():
        raise ZeroVectorCosineError("cosine metric: codebook contains a zero vector")
    if segs.shape[0] and not segs.any(axis=1).all():
        raise ZeroVectorCosineError("cosine metric: input contains a zero vector")
    idx, sim = impl.assign_cosine(segs, cds)
    return idx, 1.0 - sim
