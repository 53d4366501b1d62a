# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled SGNS kernel: sequential SGD over staged training pairs.

Updates are applied pair by pair in order (classic word2vec semantics), so
repeated rows within one batch see each other's updates. Releases the GIL
for the whole batch, which is what makes hogwild-style threading effective.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()

KERNEL_NAME = "cython"


def run_pairs(
    float[:, ::1] syn0,
    float[:, ::1] syn1,
    const int[::1] inputs,
    const int[::1] targets,
    const int[:, ::1] negatives,
    double lr,
    float[::1] work,
):
    """Apply one SGD step per pair; returns (loss_sum, term_count)."""
    cdef Py_ssize_t n = inputs.shape[0]
    cdef Py_ssize_t k = negatives.shape[1]
    cdef Py_ssize_t dim = syn0.shape[1]
    cdef Py_ssize_t p, j, c, row_in, target, pos
    cdef double f, sig, loss = 0.0
    cdef float g
    cdef long terms = 0

    with nogil:
        for p in range(n):
            row_in = inputs[p]
            pos = targets[p]
            for c in range(dim):
                work[c] = 0.0
            for j in range(k + 1):
                if j == 0:
                    target = pos
                else:
                    target = negatives[p, j - 1]
                    if target == pos:
                        continue
                f = 0.0
                for c in range(dim):
                    f += syn0[row_in, c] * syn1[target, c]
                if f > 6.0:
                    f = 6.0
                elif f < -6.0:
                    f = -6.0
                sig = 1.0 / (1.0 + exp(-f))
                if j == 0:
                    g = <float> ((1.0 - sig) * lr)
                    loss -= log(sig)
                else:
                    g = <float> (-sig * lr)
                    loss -= log(1.0 - sig)
                terms += 1
                for c in range(dim):
                    work[c] += g * syn1[target, c]
                for c in range(dim):
                    syn1[target, c] += g * syn0[row_in, c]
            for c in range(dim):
                syn0[row_in, c] += work[c]
    return loss, terms
