# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled block Gauss-Seidel sweep over a BSR matrix with 4x4 blocks.

Must stay numerically equivalent to dwrflow._kernels_py (the pure-Python
fallback); tests/test_kernels.py compares the two.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def bgs_sweep(cnp.int32_t[::1] indptr,
              cnp.int32_t[::1] indices,
              double[:, :, ::1] data,
              double[:, :, ::1] diag_inv,
              double[:, :, ::1] x,
              double[:, :, ::1] b,
              bint reverse=False):
    """One lexicographic block Gauss-Seidel sweep, updating x in place.

    x and b have shape (n, 4, k); all k right-hand sides are relaxed in
    the same pass.
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t k = x.shape[2]
    cdef Py_ssize_t i, ptr, j, a, l, m, step, start, stop
    cdef double[:, ::1] acc = np.empty((4, k))
    cdef double s

    if reverse:
        start = n - 1
        stop = -1
        step = -1
    else:
        start = 0
        stop = n
        step = 1

    i = start
    while i != stop:
        for a in range(4):
            for m in range(k):
                acc[a, m] = b[i, a, m]
        for ptr in range(indptr[i], indptr[i + 1]):
            j = indices[ptr]
            if j == i:
                continue
            for a in range(4):
                for m in range(k):
                    s = 0.0
                    for l in range(4):
                        s += data[ptr, a, l] * x[j, l, m]
                    acc[a, m] -= s
        for a in range(4):
            for m in range(k):
                s = 0.0
                for l in range(4):
                    s += diag_inv[i, a, l] * acc[l, m]
                x[i, a, m] = s
        i += step
