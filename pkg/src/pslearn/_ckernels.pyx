# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled inner loops. Inputs are integer-scaled; see pslearn.kernels."""

from libc.stdint cimport int64_t
import numpy as np


cdef inline Py_ssize_t _last_le(const int64_t[:] a, Py_ssize_t lo, Py_ssize_t hi, int64_t x) noexcept nogil:
    # largest i in [lo, hi) with a[i] <= x; assumes a[lo] <= x
    cdef Py_ssize_t mid
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if a[mid] <= x:
            lo = mid
        else:
            hi = mid
    return lo


cdef inline Py_ssize_t _first_gt(const int64_t[:] a, Py_ssize_t lo, Py_ssize_t hi, int64_t x) noexcept nogil:
    # smallest i in [lo, hi) with a[i] > x; assumes a[hi-1] > x
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] > x:
            hi = mid
        else:
            lo = mid + 1
    return lo


def mc_hits(const int64_t[:] seed_idx, const int64_t[:] u, const int64_t[:] c,
            const int64_t[:] seed_start, const int64_t[:] leaf_lo,
            const int64_t[:] sup_start, const int64_t[:] sup_point,
            const int64_t[:] sup_cum, int64_t half, int64_t U=0, int64_t P=0):
    cdef Py_ssize_t n = seed_idx.shape[0]
    cdef Py_ssize_t i, s, leaf, k
    cdef int64_t diff
    cdef long long hits = 0
    with nogil:
        for i in range(n):
            s = seed_idx[i]
            leaf = _last_le(leaf_lo, seed_start[s], seed_start[s + 1], u[i])
            k = _first_gt(sup_cum, sup_start[leaf], sup_start[leaf + 1], c[i])
            diff = sup_point[k] - u[i]
            if diff < 0:
                diff = -diff
            if diff <= half:
                hits += 1
    return hits


def ob_estimates(const int64_t[:, :] points, const int64_t[:] seeds,
                 int d, int64_t m, int64_t eps, int M, int64_t unit):
    cdef Py_ssize_t n = points.shape[0]
    cdef int64_t[:, :] est = np.empty((n, d), dtype=np.int64)
    cdef int64_t[:] cell = np.empty(d, dtype=np.int64)
    cdef int64_t[:] decoy = np.empty(d, dtype=np.int64)
    cdef unsigned char[:] hit = np.empty(d, dtype=np.uint8)
    cdef int64_t width = unit // m
    cdef int nbits = d * M
    cdef Py_ssize_t i
    cdef int a, t, in_guess, b
    cdef int64_t x, s, bits, cube, idx, lo, hi, q
    with nogil:
        for i in range(n):
            in_guess = 1
            for a in range(d):
                x = points[i, a]
                cell[a] = x // width
                hit[a] = x < cell[a] * width + eps
                if not hit[a]:
                    in_guess = 0
            s = seeds[i] - 1
            bits = s & ((<int64_t>1 << nbits) - 1)
            cube = s >> nbits
            for a in range(d):
                decoy[a] = cube % m
                cube = cube // m
            for a in range(d):
                idx = decoy[a] if in_guess else cell[a]
                lo = idx * width + eps
                hi = (idx + 1) * width
                for t in range(M):
                    q = (lo + hi) >> 1
                    if hit[a]:
                        b = (bits >> (nbits - 1 - (a * M + t))) & 1
                    else:
                        b = points[i, a] >= q
                    if b:
                        lo = q
                    else:
                        hi = q
                if hit[a]:
                    est[i, a] = cell[a] * width + (eps >> 1)
                else:
                    est[i, a] = (lo + hi) >> 1
    return np.asarray(est)
