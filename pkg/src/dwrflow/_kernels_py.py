"""Pure-Python fallback for the compiled smoother kernels.

Same contract as the Cython module dwrflow._kernels; used when the
extension is not built or when DWRFLOW_PURE_PYTHON is set.
"""

import numpy as np


def bgs_sweep(indptr, indices, data, diag_inv, x, b, reverse=False):
    """One lexicographic block Gauss-Seidel sweep, updating x in place."""
    n = x.shape[0]
    order = range(n - 1, -1, -1) if reverse else range(n)
    for i in order:
        acc = b[i].copy()
        for ptr in range(indptr[i], indptr[i + 1]):
            j = indices[ptr]
            if j == i:
                continue
            acc -= data[ptr] @ x[j]
        x[i] = diag_inv[i] @ acc
