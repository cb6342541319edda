# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Semantics must match ``_pykernels`` exactly."""

import numpy as np

from libc.math cimport log, sqrt, cos, sin
from libc.stdint cimport uint64_t, int64_t

cdef double TWO_PI = 6.283185307179586
cdef double INV_2_53 = 1.0 / 9007199254740992.0


def group_demean(const double[:, ::1] values, const int64_t[::1] codes, Py_ssize_t n_groups):
    cdef Py_ssize_t n = values.shape[0], p = values.shape[1], i, j, g
    out_arr = np.empty((n, p), dtype=np.float64)
    sums_arr = np.zeros((n_groups, p), dtype=np.float64)
    counts_arr = np.zeros(n_groups, dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[:, ::1] sums = sums_arr
    cdef double[::1] counts = counts_arr
    for i in range(n):
        g = codes[i]
        counts[g] += 1.0
        for j in range(p):
            sums[g, j] += values[i, j]
    for g in range(n_groups):
        if counts[g] > 0:
            for j in range(p):
                sums[g, j] /= counts[g]
    for i in range(n):
        g = codes[i]
        for j in range(p):
            out[i, j] = values[i, j] - sums[g, j]
    return out_arr


def cluster_score_sums(const double[:, ::1] scores, const int64_t[::1] codes, Py_ssize_t n_clusters):
    cdef Py_ssize_t n = scores.shape[0], p = scores.shape[1], i, j, g
    out_arr = np.zeros((n_clusters, p), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for i in range(n):
        g = codes[i]
        for j in range(p):
            out[g, j] += scores[i, j]
    return out_arr


def shift_index(const int64_t[::1] codes, const int64_t[::1] years, int64_t k):
    cdef Py_ssize_t n = codes.shape[0], i, j, start, stop
    cdef int64_t target
    out_arr = np.full(n, -1, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    start = 0
    while start < n:
        stop = start
        while stop < n and codes[stop] == codes[start]:
            stop += 1
        j = start
        for i in range(start, stop):
            target = years[i] - k
            while j < stop and years[j] < target:
                j += 1
            if j < stop and years[j] == target:
                out[i] = j
        start = stop
    return out_arr


cdef inline uint64_t _rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _next(uint64_t* s) nogil:
    cdef uint64_t result = _rotl(s[1] * 5, 7) * 9
    cdef uint64_t t = s[1] << 17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


def xoshiro_uint64(uint64_t[::1] state, Py_ssize_t n):
    cdef uint64_t s[4]
    cdef Py_ssize_t i
    out_arr = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] out = out_arr
    for i in range(4):
        s[i] = state[i]
    for i in range(n):
        out[i] = _next(s)
    for i in range(4):
        state[i] = s[i]
    return out_arr


def xoshiro_uniform(uint64_t[::1] state, Py_ssize_t n):
    cdef uint64_t s[4]
    cdef Py_ssize_t i
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(4):
        s[i] = state[i]
    for i in range(n):
        out[i] = <double>(_next(s) >> 11) * INV_2_53
    for i in range(4):
        state[i] = s[i]
    return out_arr


def xoshiro_normal(uint64_t[::1] state, Py_ssize_t n):
    cdef uint64_t s[4]
    cdef Py_ssize_t i, m = (n + 1) // 2
    cdef double u1, u2, r
    out_arr = np.empty(2 * m, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(4):
        s[i] = state[i]
    for i in range(m):
        u1 = 1.0 - <double>(_next(s) >> 11) * INV_2_53
        u2 = <double>(_next(s) >> 11) * INV_2_53
        r = sqrt(-2.0 * log(u1))
        out[2 * i] = r * cos(TWO_PI * u2)
        out[2 * i + 1] = r * sin(TWO_PI * u2)
    for i in range(4):
        state[i] = s[i]
    return out_arr[:n]
