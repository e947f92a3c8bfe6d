# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled permutation kernel.

Same construction as the numpy fallback: one Philox4x64-10 stream per
(permutation, topic) pair drives a Fisher-Yates shuffle of that topic's
score column, so output is bit-identical to the fallback and independent
of thread count.  OpenMP parallelizes over permutations.
"""

import numpy as np

from cython.parallel cimport parallel, prange
cimport openmp
from libc.stdlib cimport free, malloc
from libc.stdint cimport uint64_t

cdef extern from *:
    ctypedef unsigned long long u128 "__uint128_t"

cdef uint64_t M0 = 0xD2E7470EE14C6C93
cdef uint64_t M1 = 0xCA5A826395121157
cdef uint64_t W0 = 0x9E3779B97F4A7C15
cdef uint64_t W1 = 0xBB67AE8584CAA73B
cdef uint64_t TUKEY_DOMAIN = 0x74756B6579687364  # b"tukeyhsd"


cdef struct Stream:
    uint64_t k0
    uint64_t k1
    uint64_t c1
    uint64_t c2
    uint64_t t
    uint64_t blk
    int have
    uint64_t buf[4]


cdef inline void philox_block(uint64_t c0, uint64_t c1, uint64_t c2, uint64_t c3,
                              uint64_t k0, uint64_t k1, uint64_t* out) noexcept nogil:
    cdef int rnd
    cdef uint64_t hi0, lo0, hi1, lo1
    cdef u128 p0, p1
    for rnd in range(10):
        if rnd:
            k0 = k0 + W0
            k1 = k1 + W1
        p0 = (<u128> M0) * c0
        p1 = (<u128> M1) * c2
        hi0 = <uint64_t> (p0 >> 64)
        lo0 = <uint64_t> p0
        hi1 = <uint64_t> (p1 >> 64)
        lo1 = <uint64_t> p1
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    out[0] = c0
    out[1] = c1
    out[2] = c2
    out[3] = c3


cdef inline uint64_t stream_draw(Stream* s) noexcept nogil:
    # Draw t of the stream is lane t % 4 of the block at counter t // 4.
    cdef uint64_t blk = s.t >> 2
    cdef uint64_t v
    if s.have == 0 or blk != s.blk:
        philox_block(blk, s.c1, s.c2, 0, s.k0, s.k1, s.buf)
        s.blk = blk
        s.have = 1
    v = s.buf[s.t & 3]
    s.t = s.t + 1
    return v


cdef inline uint64_t stream_bounded(Stream* s, uint64_t bound) noexcept nogil:
    # Lemire's unbiased bounded generation with rejection.
    cdef uint64_t threshold = (0 - bound) % bound
    cdef uint64_t x, lo
    cdef u128 prod
    while True:
        x = stream_draw(s)
        prod = (<u128> x) * bound
        lo = <uint64_t> prod
        if lo >= threshold:
            return <uint64_t> (prod >> 64)


def max_stat_sample(double[:, ::1] values, Py_ssize_t permutations, uint64_t seed, int workers=0):
    """Permutation sample of max(run sums) - min(run sums); compiled backend."""
    cdef Py_ssize_t m = values.shape[0]
    cdef Py_ssize_t n = values.shape[1]
    out_arr = np.empty(permutations, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef int nthreads = workers if workers > 0 else openmp.omp_get_max_threads()
    if nthreads < 1:
        nthreads = 1
    cdef double* colbuf = <double*> malloc(<size_t> nthreads * m * sizeof(double))
    cdef double* sumbuf = <double*> malloc(<size_t> nthreads * m * sizeof(double))
    cdef Stream* stbuf = <Stream*> malloc(<size_t> nthreads * sizeof(Stream))
    if colbuf == NULL or sumbuf == NULL or stbuf == NULL:
        free(colbuf)
        free(sumbuf)
        free(stbuf)
        raise MemoryError()
    cdef Py_ssize_t b, i, j, r
    cdef int tid
    cdef double tmp, mx, mn
    cdef double* col
    cdef double* sums
    cdef Stream* st
    try:
        with nogil, parallel(num_threads=nthreads):
            tid = openmp.omp_get_thread_num()
            col = colbuf + tid * m
            sums = sumbuf + tid * m
            st = stbuf + tid
            st.k0 = seed
            st.k1 = TUKEY_DOMAIN
            for b in prange(permutations, schedule='static'):
                for i in range(m):
                    sums[i] = 0.0
                for j in range(n):
                    for i in range(m):
                        col[i] = values[i, j]
                    st.c1 = <uint64_t> b
                    st.c2 = <uint64_t> j
                    st.t = 0
                    st.have = 0
                    for i in range(m - 1, 0, -1):
                        r = <Py_ssize_t> stream_bounded(st, <uint64_t> (i + 1))
                        tmp = col[i]
                        col[i] = col[r]
                        col[r] = tmp
                    for i in range(m):
                        sums[i] = sums[i] + col[i]
                mx = sums[0]
                mn = sums[0]
                for i in range(1, m):
                    if sums[i] > mx:
                        mx = sums[i]
                    if sums[i] < mn:
                        mn = sums[i]
                out[b] = mx - mn
    finally:
        free(colbuf)
        free(sumbuf)
        free(stbuf)
    return out_arr
