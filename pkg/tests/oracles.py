"""Independent brute-force reference implementations used by the tests.

Everything here is deliberately written as literal loops over definitions,
sharing no code with the package's optimized paths.
"""

from __future__ import annotations

import numpy as np


def brute_nearest(codes, v, metric: str = "l2") -> tuple[int, float]:
    """Scan all codevectors; first-best wins ties."""
    v = np.asarray(v, dtype=np.float64)
    codes = np.asarray(codes, dtype=np.float64)
    best_i = 0
    best_score = None
    for i, c in enumerate(codes):
        if metric == "l2":
            score = float(np.sum((v - c) ** 2))
            better = best_score is None or score < best_score
        else:
            score = float(np.dot(v, c) / (np.linalg.norm(v) * np.linalg.norm(c)))
            better = best_score is None or score > best_score
        if better:
            best_i, best_score = i, score
    if metric == "l2":
        return best_i, float(np.sqrt(best_score))
    return best_i, 1.0 - best_score


def brute_looc_indices(map_data: np.ndarray, codes: np.ndarray, m: int,
                       metric: str = "l2") -> np.ndarray:
    """Per-location, per-segment nearest-codevector scan (shared codebook)."""
    h, w, d = map_data.shape
    ds = d // m
    out = np.empty((h, w, m), dtype=np.int32)
    for i in range(h):
        for j in range(w):
            vec = map_data[i, j]
            for q in range(m):
                seg = vec[q * ds : (q + 1) * ds]
                out[i, j, q], _ = brute_nearest(codes, seg, metric)
    return out


def brute_pq_indices(map_data: np.ndarray, sub_codes: list[np.ndarray],
                     metric: str = "l2") -> np.ndarray:
    """Per-segment scan restricted to that segment's own sub-codebook."""
    h, w, d = map_data.shape
    m = len(sub_codes)
    ds = d // m
    out = np.empty((h, w, m), dtype=np.int32)
    for i in range(h):
        for j in range(w):
            vec = map_data[i, j]
            for q in range(m):
                seg = vec[q * ds : (q + 1) * ds]
                out[i, j, q], _ = brute_nearest(sub_codes[q], seg, metric)
    return out


def mse_loops(a: np.ndarray, b: np.ndarray) -> float:
    total = 0.0
    count = 0
    for x, y in zip(a.reshape(-1).tolist(), b.reshape(-1).tolist()):
        total += (x - y) ** 2
        count += 1
    return total / count


def l1_loops(a: np.ndarray, b: np.ndarray) -> float:
    total = 0.0
    count = 0
    for x, y in zip(a.reshape(-1).tolist(), b.reshape(-1).tolist()):
        total += abs(x - y)
        count += 1
    return total / count


def ssim_reference(x: np.ndarray, y: np.ndarray, win: int, peak: float) -> float:
    """Literal per-window SSIM with uniform weights, population statistics."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    h, w = x.shape
    values = []
    for i in range(h - win + 1):
        for j in range(w - win + 1):
            px = x[i : i + win, j : j + win]
            py = y[i : i + win, j : j + win]
            mx = px.mean()
            my = py.mean()
            vx = (px * px).mean() - mx * mx
            vy = (py * py).mean() - my * my
            cov = (px * py).mean() - mx * my
            num = (2 * mx * my + c1) * (2 * cov + c2)
            den = (mx * mx + my * my + c1) * (vx + vy + c2)
            values.append(num / den)
    return float(np.mean(values))


def segment_usage_reference(index_arrays: list[np.ndarray], k: int) -> list[float]:
    """Set-based per-segment usage over (h, w, m) index arrays."""
    m = index_arrays[0].shape[2]
    fractions = []
    for q in range(m):
        seen: set[int] = set()
        for arr in index_arrays:
            seen.update(int(v) for v in arr[:, :, q].reshape(-1))
        fractions.append(len(seen) / k)
    return fractions


def sharing_reference(index_arrays: list[np.ndarray], k: int) -> list[float]:
    """Per-codevector segment sets; entry[n] = share used by >= n segments."""
    m = index_arrays[0].shape[2]
    segments_of: dict[int, set[int]] = {c: set() for c in range(k)}
    for arr in index_arrays:
        h, w, _ = arr.shape
        for i in range(h):
            for j in range(w):
                for q in range(m):
                    segments_of[int(arr[i, j, q])].add(q)
    return [
        sum(1 for c in range(k) if len(segments_of[c]) >= n) / k
        for n in range(m + 1)
    ]
