# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sampling kernel. Same draws as ``_pykernel``; runs without the GIL."""

import numpy as np
from nblsat._pykernel import reduce_block

from libc.stdint cimport int8_t, uint64_t
from libc.stdlib cimport free, malloc

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL


cdef inline double _uniform(uint64_t key, uint64_t index) noexcept nogil:
    cdef uint64_t z = key + (index + 1) * GAMMA
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    z = z ^ (z >> 31)
    return (<double>(z >> 11) + 0.5) * 1.1102230246251565e-16 - 0.5


cdef double _sample(uint64_t key, uint64_t sigma_key, bint decouple, uint64_t base,
                    const int8_t[:, ::1] code, const int8_t[:, ::1] allow,
                    Py_ssize_t n, Py_ssize_t m, double *P, double *Q) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef uint64_t idx
    cdef double a, b, s, hyper, falsify, tau, sigma = 1.0
    cdef int8_t c
    for i in range(n):
        P[i] = 1.0 if allow[i, 0] else 0.0
        Q[i] = 1.0 if allow[i, 1] else 0.0
    for j in range(m):
        hyper = 1.0
        falsify = 1.0
        for i in range(n):
            idx = base + <uint64_t>(2 * (j * n + i))
            a = _uniform(key, idx)
            b = _uniform(key, idx + 1)
            P[i] *= a
            Q[i] *= b
            if decouple:
                a = _uniform(sigma_key, idx)
                b = _uniform(sigma_key, idx + 1)
            s = a + b
            hyper *= s
            c = code[j, i]
            if c == 0:
                falsify *= s
            elif c == 1:
                falsify *= b
            elif c == 2:
                falsify *= a
            else:
                falsify = 0.0
        sigma *= hyper - falsify
    tau = 1.0
    for i in range(n):
        tau *= P[i] + Q[i]
    return tau * sigma


def block_values(uint64_t key, uint64_t sigma_key, bint decouple, uint64_t t0,
                 Py_ssize_t count, const int8_t[:, ::1] code, const int8_t[:, ::1] allow):
    cdef Py_ssize_t m = code.shape[0], n = code.shape[1], k
    cdef uint64_t width = 2 * n * m
    out_arr = np.empty(count, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double *P = <double *> malloc((n + 1) * sizeof(double))
    cdef double *Q = <double *> malloc((n + 1) * sizeof(double))
    if P == NULL or Q == NULL:
        free(P)
        free(Q)
        raise MemoryError()
    with nogil:
        for k in range(count):
            out[k] = _sample(key, sigma_key, decouple, (t0 + k) * width,
                             code, allow, n, m, P, Q)
    free(P)
    free(Q)
    return out_arr


def block_stats(uint64_t key, uint64_t sigma_key, bint decouple, uint64_t t0,
                Py_ssize_t count, const int8_t[:, ::1] code, const int8_t[:, ::1] allow):
    # Same reduction as the fallback, so estimates agree bit for bit.
    if count == 0:
        return 0, 0.0, 0.0
    return reduce_block(np.asarray(
        block_values(key, sigma_key, decouple, t0, count, code, allow)))
