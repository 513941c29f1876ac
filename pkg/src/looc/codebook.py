"""Codebook construction, nearest-codevector search, and collapse control.

Codebooks are immutable; every update returns a fresh instance. The fit
loop alternates assignment, EMA movement toward assigned means, and
reactivation of inactive codevectors onto data anchors, which is what
drives usage to 100% on any dataset with at least K distinct points.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .core import Codebook, Metric
from .errors import (
    DimensionMismatchError,
    EmptyAnchorSetError,
    EmptySampleSetError,
    IndexOutOfRangeError,
    LoocError,
)


class AnchorMode(str, Enum):
    RANDOM_FEATURE = "random"
    FARTHEST_FEATURE = "farthest"


@dataclass(frozen=True)
class ReactivationPolicy:
    """When and how inactive codevectors are re-seeded from features.

    A codevector is inactive when its usage EMA falls below
    ``dead_threshold``; ``decay`` is the EMA decay applied per update
    round (to both usage and codevector movement in the fit loop).
    """

    decay: float = 0.99
    dead_threshold: float = 0.1
    anchor_mode: AnchorMode = AnchorMode.RANDOM_FEATURE

    def __post_init__(self) -> None:
        if not 0.0 < self.decay < 1.0:
            raise LoocError("decay must lie in (0, 1)")
        if self.dead_threshold <= 0.0:
            raise LoocError("dead_threshold must be positive")
        if not isinstance(self.anchor_mode, AnchorMode):
            object.__setattr__(self, "anchor_mode", AnchorMode(self.anchor_mode))


def _as_samples(samples, d_star: int | None = None) -> np.ndarray:
    if isinstance(samples, np.ndarray) and samples.ndim == 2:
        arr = np.ascontiguousarray(samples, dtype=np.float32)
    else:
        rows = [np.asarray(s, dtype=np.float32).reshape(-1) for s in samples]
        if not rows:
            return np.empty((0, 0 if d_star is None else d_star), np.float32)
        widths = {r.size for r in rows}
        if len(widths) != 1:
            raise DimensionMismatchError("samples have inconsistent dimensions")
        arr = np.stack(rows)
    if d_star is not None and arr.shape[1] != d_star:
        raise DimensionMismatchError(
            f"expected dimension {d_star}, got {arr.shape[1]}"
        )
    return arr


def codebook_init(k: int, d_star: int, samples, seed: int) -> Codebook:
    """Seed K codevectors from data samples, k-means++ style.

    The first codevector is a uniformly random sample; each further one is
    drawn with probability proportional to squared L2 distance from the
    nearest already-chosen codevector. When the samples cannot provide any
    more spread (all residual distances zero), picks fall back to uniform,
    so duplicate codevectors are possible with fewer distinct samples than
    K. Deterministic per seed; usage counters start at zero.
    """
    if k < 1:
        raise LoocError("K must be positive")
    arr = _as_samples(samples, d_star)
    n = arr.shape[0]
    if n == 0:
        raise EmptySampleSetError("need at least one sample")
    rng = np.random.default_rng(seed)
    data = arr.astype(np.float64)
    chosen = np.empty((k, d_star), dtype=np.float64)
    chosen[0] = data[rng.integers(n)]
    d2 = ((data - chosen[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total > 0.0:
            pick = rng.choice(n, p=d2 / total)
        else:
            pick = rng.integers(n)
        chosen[i] = data[pick]
        d2 = np.minimum(d2, ((data - chosen[i]) ** 2).sum(axis=1))
    return Codebook(vectors=chosen.astype(np.float32))


def nearest_code(cb: Codebook, v, metric: Metric = Metric.L2) -> tuple[int, float]:
    """Index of the most similar codevector and its distance.

    Distance is unsquared L2 under Metric.L2 and (1 - cosine similarity)
    under Metric.COSINE; ties break to the lowest index.
    """
    vec = np.asarray(v, dtype=np.float32).reshape(-1)
    if vec.size != cb.d_star:
        raise DimensionMismatchError(
            f"vector has dimension {vec.size}, codebook expects {cb.d_star}"
        )
    idx, dist = kernels.assign(vec[None, :], cb.vectors, metric)
    return int(idx[0]), float(dist[0])


def _ema_update_arrays(
    cb: Codebook, indices: np.ndarray, vectors: np.ndarray, decay: float
) -> Codebook:
    if not 0.0 < decay < 1.0:
        raise LoocError("decay must lie in (0, 1)")
    if vectors.shape[1] != cb.d_star:
        raise DimensionMismatchError(
            f"assigned vectors have dimension {vectors.shape[1]}, expected {cb.d_star}"
        )
    if indices.size == 0:
        return cb
    if (indices < 0).any() or (indices >= cb.k).any():
        raise IndexOutOfRangeError("assignment index outside [0, K)")
    sums = np.zeros((cb.k, cb.d_star), dtype=np.float64)
    np.add.at(sums, indices, vectors.astype(np.float64))
    hits = np.bincount(indices, minlength=cb.k).astype(np.int64)
    hit = hits > 0
    new_vec = cb.vectors.astype(np.float64)
    means = sums[hit] / hits[hit, None]
    new_vec[hit] = decay * new_vec[hit] + (1.0 - decay) * means
    new_ema = decay * cb.usage_ema + (1.0 - decay) * hits
    return Codebook(
        vectors=new_vec.astype(np.float32),
        usage_count=cb.usage_count + hits,
        usage_ema=new_ema,
    )


def ema_update(
    cb: Codebook, assignments: Iterable[tuple[int, Sequence[float]]], decay: float
) -> Codebook:
    """Move each hit codevector toward the mean of its assigned vectors.

    new = decay * old + (1 - decay) * mean(assigned); the usage EMA is
    updated with the same decay against this round's hit counts, and
    lifetime hit counts are incremented. Unhit codevectors keep their
    values. An empty assignment list is a no-op.
    """
    pairs = list(assignments)
    if not pairs:
        return cb
    indices = np.asarray([int(i) for i, _ in pairs], dtype=np.int64)
    vectors = _as_samples([v for _, v in pairs], cb.d_star)
    return _ema_update_arrays(cb, indices, vectors, decay)


def record_usage(cb: Codebook, indices) -> Codebook:
    """Add quantization hits to the lifetime usage counters."""
    flat = np.asarray(indices, dtype=np.int64).reshape(-1)
    if flat.size and ((flat < 0).any() or (flat >= cb.k).any()):
        raise IndexOutOfRangeError("index outside [0, K)")
    hits = np.bincount(flat, minlength=cb.k).astype(np.int64)
    return Codebook(
        vectors=cb.vectors,
        usage_count=cb.usage_count + hits,
        usage_ema=cb.usage_ema,
    )


def reactivate_dead(
    cb: Codebook, anchors, policy: ReactivationPolicy, seed: int
) -> tuple[Codebook, int]:
    """Replace inactive codevectors with anchor features.

    Under RANDOM_FEATURE each dead codevector gets an anchor drawn
    uniformly; under FARTHEST_FEATURE dead codevectors (in index order)
    get the anchor farthest from its nearest live-or-already-placed
    codevector. Replaced entries have their usage EMA reset to the dead
    threshold. Codevectors at or above the threshold are never touched.
    """
    arr = _as_samples(anchors, cb.d_star)
    if arr.shape[0] == 0:
        raise EmptyAnchorSetError("need at least one anchor feature")
    dead = np.flatnonzero(cb.usage_ema < policy.dead_threshold)
    if dead.size == 0:
        return cb, 0
    vectors = cb.vectors.astype(np.float64)
    anchors64 = arr.astype(np.float64)
    rng = np.random.default_rng(seed)
    if policy.anchor_mode is AnchorMode.RANDOM_FEATURE:
        picks = rng.integers(0, arr.shape[0], size=dead.size)
        vectors[dead] = anchors64[picks]
    else:
        dead_set = set(dead.tolist())
        live = [vectors[i] for i in range(cb.k) if i not in dead_set]
        d2min = None
        for vec in live:
            d2 = ((anchors64 - vec) ** 2).sum(axis=1)
            d2min = d2 if d2min is None else np.minimum(d2min, d2)
        for slot in dead:
            pick = 0 if d2min is None else int(np.argmax(d2min))
            vectors[slot] = anchors64[pick]
            d2 = ((anchors64 - anchors64[pick]) ** 2).sum(axis=1)
            d2min = d2 if d2min is None else np.minimum(d2min, d2)
    new_ema = cb.usage_ema.copy()
    new_ema[dead] = policy.dead_threshold
    out = Codebook(
        vectors=vectors.astype(np.float32),
        usage_count=cb.usage_count,
        usage_ema=new_ema,
    )
    return out, int(dead.size)


def usage_fraction(cb: Codebook) -> float:
    """Fraction of codevectors hit at least once over the codebook's life."""
    return float((cb.usage_count > 0).sum() / cb.k)


@dataclass(frozen=True)
class FitRound:
    round: int
    mse: float
    usage: float
    reactivated: int


def fit_codebook(
    samples,
    k: int,
    *,
    seed: int = 0,
    metric: Metric = Metric.L2,
    rounds: int = 50,
    policy: ReactivationPolicy | None = None,
    reactivate: bool = True,
    stop_at_full_usage: bool = False,
) -> tuple[Codebook, list[FitRound]]:
    """Offline codebook fit: assign, EMA-update, optionally reactivate.

    ``samples`` are the training segments, shape (n, d_star). The per-round
    history records elementwise reconstruction MSE (of the segments against
    their assigned codevectors) and the running usage fraction.
    """
    arr = _as_samples(samples)
    if arr.shape[0] == 0:
        raise EmptySampleSetError("need at least one sample")
    policy = policy or ReactivationPolicy()
    cb = codebook_init(k, arr.shape[1], arr, seed)
    history: list[FitRound] = []
    for rnd in range(rounds):
        idx, dist = kernels.assign(arr, cb.vectors, metric)
        cb = _ema_update_arrays(cb, idx.astype(np.int64), arr, policy.decay)
        reactivated = 0
        if reactivate:
            cb, reactivated = reactivate_dead(
                cb, arr, policy, seed=seed * 1_000_003 + rnd + 1
            )
        mse = float((dist**2).mean() / arr.shape[1])
        history.append(FitRound(rnd, mse, usage_fraction(cb), reactivated))
        if stop_at_full_usage and history[-1].usage == 1.0:
            break
    return cb, history
