# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled sampling kernel.

Same counter RNG and opcode semantics as the numpy backend, evaluated one
sample at a time in C with short-circuiting.  Short-circuits are safe
because each draw is a pure function of (seed, sample index, coin index):
skipping a draw cannot change any other draw.
"""

from libc.stdint cimport int8_t, int32_t, int64_t, uint8_t, uint64_t

import numpy as np


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z ^= z >> 33
    z *= <uint64_t>0xFF51AFD7ED558CCD
    z ^= z >> 33
    z *= <uint64_t>0xC4CEB9FE1A85EC53
    z ^= z >> 33
    return z


cdef inline uint8_t _draw(uint64_t key, int32_t site,
                          const uint64_t[::1] thresholds) noexcept nogil:
    cdef uint64_t z = _mix64(key ^ (<uint64_t>site * <uint64_t>0x94D049BB133111EB))
    return (z >> 11) < thresholds[site]


def count_range(const int8_t[::1] op, const int32_t[::1] arg_off,
                const int32_t[::1] args, const int32_t[::1] arg_sites,
                const int32_t[::1] node_site, const uint64_t[::1] thresholds,
                uint64_t seed, uint64_t first, uint64_t last):
    """Per-slot true-counts over sample indices [first, last)."""
    cdef Py_ssize_t n_slots = op.shape[0]
    counts_arr = np.zeros(n_slots, dtype=np.int64)
    values_arr = np.zeros(n_slots, dtype=np.uint8)
    cdef int64_t[::1] counts = counts_arr
    cdef uint8_t[::1] values = values_arr
    cdef uint64_t base = _mix64(seed ^ <uint64_t>0x9E3779B97F4A7C15)
    cdef uint64_t k, key
    cdef Py_ssize_t s
    cdef int32_t lo, hi, i
    cdef uint8_t v
    cdef int8_t code
    with nogil:
        for k in range(first, last):
            key = _mix64(base ^ (k * <uint64_t>0xBF58476D1CE4E5B9))
            for s in range(n_slots):
                code = op[s]
                lo = arg_off[s]
                hi = arg_off[s + 1]
                if code == 0:
                    v = _draw(key, node_site[s], thresholds)
                elif code == 1:
                    v = 1
                    for i in range(lo, hi):
                        if not values[args[i]]:
                            v = 0
                            break
                    if v:
                        v = _draw(key, node_site[s], thresholds)
                elif code == 2:
                    v = 0
                    for i in range(lo, hi):
                        if values[args[i]] and _draw(key, arg_sites[i], thresholds):
                            v = 1
                            break
                else:
                    v = 1
                    for i in range(lo, hi):
                        if values[args[i]] and _draw(key, arg_sites[i], thresholds):
                            v = 0
                            break
                values[s] = v
                counts[s] += v
    return counts_arr
