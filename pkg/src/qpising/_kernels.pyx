# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled state-vector kernels (hot inner loops).

Same contract as ``_kernels_py``: in-place updates of a contiguous
complex128 amplitude array, little-endian qubit indexing.
"""

import numpy as np

cimport cython


def apply_1q(double complex[::1] amps, int q, double complex m00,
             double complex m01, double complex m10, double complex m11):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << q
    cdef Py_ssize_t nblocks = n >> (q + 1)
    cdef Py_ssize_t blk, base, i
    cdef double complex a, b
    with nogil:
        for blk in range(nblocks):
            base = blk * (stride << 1)
            for i in range(base, base + stride):
                a = amps[i]
                b = amps[i + stride]
                amps[i] = m00 * a + m01 * b
                amps[i + stride] = m10 * a + m11 * b


def apply_diag_1q(double complex[::1] amps, int q, double complex p0,
                  double complex p1):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << q
    cdef Py_ssize_t nblocks = n >> (q + 1)
    cdef Py_ssize_t blk, base, i
    with nogil:
        for blk in range(nblocks):
            base = blk * (stride << 1)
            for i in range(base, base + stride):
                amps[i] = amps[i] * p0
                amps[i + stride] = amps[i + stride] * p1


def apply_diag_2q(double complex[::1] amps, int qa, int qb, double complex p00,
                  double complex p01, double complex p10, double complex p11):
    """Phase p_{xb xa} keyed by the bits of qubits qa (LSB of the key) and qb."""
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t ma = (<Py_ssize_t>1) << qa
    cdef Py_ssize_t mb = (<Py_ssize_t>1) << qb
    cdef Py_ssize_t k
    cdef int idx
    cdef double complex phases[4]
    phases[0] = p00
    phases[1] = p01
    phases[2] = p10
    phases[3] = p11
    with nogil:
        for k in range(n):
            idx = 0
            if k & ma:
                idx += 1
            if k & mb:
                idx += 2
            amps[k] = amps[k] * phases[idx]


def expect_z(double complex[::1] amps, int q):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << q
    cdef Py_ssize_t nblocks = n >> (q + 1)
    cdef Py_ssize_t blk, base, i
    cdef double p0 = 0.0, p1 = 0.0
    cdef double complex a
    with nogil:
        for blk in range(nblocks):
            base = blk * (stride << 1)
            for i in range(base, base + stride):
                a = amps[i]
                p0 += a.real * a.real + a.imag * a.imag
                a = amps[i + stride]
                p1 += a.real * a.real + a.imag * a.imag
    return p0 - p1
