# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled nearest-codevector assignment kernels.

The numpy fallback in _kernels_py must stay bitwise identical: both
accumulate in float64 over the channel axis in the same order. Keep the
two in sync when editing either.
"""

from libc.math cimport INFINITY, sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()


def assign_l2(const float[:, ::1] segs, const float[:, ::1] codes):
    """Index of the L2-nearest codevector per row, plus squared distance."""
    cdef Py_ssize_t n = segs.shape[0]
    cdef Py_ssize_t k = codes.shape[0]
    cdef Py_ssize_t d = segs.shape[1]
    idx_arr = np.empty(n, dtype=np.int32)
    dist_arr = np.empty(n, dtype=np.float64)
    cdef int[::1] idx = idx_arr
    cdef double[::1] dist = dist_arr
    cdef Py_ssize_t i, c, j
    cdef double acc, best, diff
    cdef int best_c
    for i in range(n):
        best = INFINITY
        best_c = 0
        for c in range(k):
            acc = 0.0
            for j in range(d):
                diff = <double> segs[i, j] - <double> codes[c, j]
                acc = acc + diff * diff
            if acc < best:
                best = acc
                best_c = <int> c
        idx[i] = best_c
        dist[i] = best
    return idx_arr, dist_arr


def assign_cosine(const float[:, ::1] segs, const float[:, ::1] codes):
    """Index of the max-cosine codevector per row, plus that similarity.

    Norms must be nonzero; the dispatcher checks before calling.
    """
    cdef Py_ssize_t n = segs.shape[0]
    cdef Py_ssize_t k = codes.shape[0]
    cdef Py_ssize_t d = segs.shape[1]
    idx_arr = np.empty(n, dtype=np.int32)
    sim_arr = np.empty(n, dtype=np.float64)
    norm_arr = np.empty(k, dtype=np.float64)
    cdef int[::1] idx = idx_arr
    cdef double[::1] sim = sim_arr
    cdef double[::1] cnorm = norm_arr
    cdef Py_ssize_t i, c, j
    cdef double acc, dot, best, snorm, s
    cdef int best_c
    for c in range(k):
        acc = 0.0
        for j in range(d):
            acc = acc + <double> codes[c, j] * <double> codes[c, j]
        cnorm[c] = sqrt(acc)
    for i in range(n):
        acc = 0.0
        for j in range(d):
            acc = acc + <double> segs[i, j] * <double> segs[i, j]
        snorm = sqrt(acc)
        best = -INFINITY
        best_c = 0
        for c in range(k):
            dot = 0.0
            for j in range(d):
                dot = dot + <double> segs[i, j] * <double> codes[c, j]
            s = dot / (snorm * cnorm[c])
            if s > best:
                best = s
                best_c = <int> c
        idx[i] = best_c
        sim[i] = best
    return idx_arr, sim_arr
