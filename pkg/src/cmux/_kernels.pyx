# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Must stay bit-identical to ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t

cnp.import_array()

cdef uint64_t _GAMMA = 0x9E3779B97F4A7C15ULL
cdef uint64_t _MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t _MIX2 = 0x94D049BB133111EBULL
cdef uint64_t _STREAM = 0xD1B54A32D192ED03ULL
cdef double _INV53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _splitmix(uint64_t z) nogil:
    z = z + _GAMMA
    z = (z ^ (z >> 30)) * _MIX1
    z = (z ^ (z >> 27)) * _MIX2
    return z ^ (z >> 31)


cdef uint64_t _base(object seed, object stream):
    cdef uint64_t s = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t t = <uint64_t>(stream & 0xFFFFFFFFFFFFFFFF)
    return _splitmix(s ^ (t * _STREAM))


def hash_grid(seed, stream, Py_ssize_t rows, Py_ssize_t cols):
    cdef uint64_t base = _base(seed, stream)
    cdef cnp.ndarray[cnp.uint64_t, ndim=2] out = np.empty((rows, cols), dtype=np.uint64)
    cdef uint64_t[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef uint64_t r
    with nogil:
        for i in range(rows):
            r = _splitmix(base + <uint64_t>i)
            for j in range(cols):
                o[i, j] = _splitmix(r + <uint64_t>j)
    return out


def rademacher(seed, stream, Py_ssize_t rows, Py_ssize_t cols):
    cdef uint64_t base = _base(seed, stream)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((rows, cols), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef uint64_t r
    with nogil:
        for i in range(rows):
            r = _splitmix(base + <uint64_t>i)
            for j in range(cols):
                o[i, j] = 1.0 if (_splitmix(r + <uint64_t>j) >> 63) else -1.0
    return out


def uniform01(seed, stream, Py_ssize_t rows, Py_ssize_t cols):
    cdef uint64_t base = _base(seed, stream)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((rows, cols), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef uint64_t r
    with nogil:
        for i in range(rows):
            r = _splitmix(base + <uint64_t>i)
            for j in range(cols):
                o[i, j] = <double>(_splitmix(r + <uint64_t>j) >> 11) * _INV53
    return out


def modulate_sum(x, signs_t):
    xc = np.ascontiguousarray(x, dtype=np.complex128)
    cdef const double[:, ::1] xv = xc.view(np.float64)
    cdef const double[:, ::1] sv = np.ascontiguousarray(signs_t, dtype=np.float64)
    cdef Py_ssize_t m, n
    cdef Py_ssize_t M = sv.shape[0], N = sv.shape[1]
    if xv.shape[0] != M or xv.shape[1] != 2 * N:
        raise ValueError("shape mismatch between samples and signs")
    out = np.zeros(N, dtype=np.complex128)
    cdef double[::1] o = out.view(np.float64)
    cdef double d
    with nogil:
        for m in range(M):
            for n in range(N):
                d = sv[m, n]
                o[2 * n] = o[2 * n] + d * xv[m, 2 * n]
                o[2 * n + 1] = o[2 * n + 1] + d * xv[m, 2 * n + 1]
    return out


def demodulate(y, signs_t):
    yc = np.ascontiguousarray(y, dtype=np.complex128)
    cdef const double[::1] yv = yc.view(np.float64)
    cdef const double[:, ::1] sv = np.ascontiguousarray(signs_t, dtype=np.float64)
    cdef Py_ssize_t m, n
    cdef Py_ssize_t M = sv.shape[0], N = sv.shape[1]
    if yv.shape[0] != 2 * N:
        raise ValueError("shape mismatch between samples and signs")
    out = np.empty((M, N), dtype=np.complex128)
    cdef double[:, ::1] o = out.view(np.float64)
    cdef double d
    with nogil:
        for m in range(M):
            for n in range(N):
                d = sv[m, n]
                o[m, 2 * n] = d * yv[2 * n]
                o[m, 2 * n + 1] = d * yv[2 * n + 1]
    return out
