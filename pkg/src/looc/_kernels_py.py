"""Pure-numpy assignment kernels, bitwise identical to the compiled ones.

Accumulation runs in float64 one channel at a time, matching _kernels.pyx
operation for operation, so indices, distances, and tie-breaks agree
exactly between backends. Inputs are chunked over rows to bound the
(chunk, K) temporaries.
"""

from __future__ import annotations

import numpy as np

_CHUNK_CELLS = 4_000_000


def _row_chunks(n: int, k: int):
    step = max(1, _CHUNK_CELLS // max(k, 1))
    for lo in range(0, n, step):
        yield lo, min(lo + step, n)


def assign_l2(segs: np.ndarray, codes: np.ndarray):
    """Index of the L2-nearest codevector per row, plus squared distance."""
    s64 = segs.astype(np.float64)
    c64 = codes.astype(np.float64)
    n, d = s64.shape
    k = c64.shape[0]
    idx = np.empty(n, dtype=np.int32)
    dist = np.empty(n, dtype=np.float64)
    for lo, hi in _row_chunks(n, k):
        s = s64[lo:hi]
        acc = np.zeros((s.shape[0], k), dtype=np.float64)
        for j in range(d):
            diff = s[:, j, None] - c64[None, :, j]
            acc += diff * diff
        best = np.argmin(acc, axis=1)
        idx[lo:hi] = best
        dist[lo:hi] = acc[np.arange(s.shape[0]), best]
    return idx, dist


def assign_cosine(segs: np.ndarray, codes: np.ndarray):
    """Index of the max-cosine codevector per row, plus that similarity."""
    s64 = segs.astype(np.float64)
    c64 = codes.astype(np.float64)
    n, d = s64.shape
    k = c64.shape[0]
    acc = np.zeros(k, dtype=np.float64)
    for j in range(d):
        cj = c64[:, j]
        acc += cj * cj
    cnorm = np.sqrt(acc)
    idx = np.empty(n, dtype=np.int32)
    sim = np.empty(n, dtype=np.float64)
    for lo, hi in _row_chunks(n, k):
        s = s64[lo:hi]
        acc2 = np.zeros(s.shape[0], dtype=np.float64)
        for j in range(d):
            sj = s[:, j]
            acc2 += sj * sj
        snorm = np.sqrt(acc2)
        dots = np.zeros((s.shape[0], k), dtype=np.float64)
        for j in range(d):
            dots += s[:, j, None] * c64[None, :, j]
        sims = dots / (snorm[:, None] * cnorm[None, :])
        best = np.argmax(sims, axis=1)
        idx[lo:hi] = best
        sim[lo:hi] = sims[np.arange(s.shape[0]), best]
    return idx, sim
