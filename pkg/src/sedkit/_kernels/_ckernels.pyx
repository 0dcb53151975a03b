# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: contingency counting and the EM expectation sweep."""

from libc.math cimport log
from libc.stdlib cimport free, malloc

import numpy as np

# Matches py_kernels.LOG_FLOOR.
cdef double LOG_FLOOR = -708.0


def joint_counts(const long long[::1] cfg, const int[::1] child, long long q, long long r):
    """Contingency table: rows are parent configurations, columns child states."""
    cdef long long n = cfg.shape[0]
    out_arr = np.zeros((q, r), dtype=np.int64)
    cdef long long[:, ::1] out = out_arr
    cdef long long m
    for m in range(n):
        out[cfg[m], child[m]] += 1
    return out_arr


def em_estep(const long long[::1] hidden_cfg,
             const double[:, ::1] theta_h,
             const long long[:, ::1] child_base,
             const long long[::1] child_stride,
             const int[:, ::1] child_code,
             const double[::1] theta_c_flat,
             const long long[::1] child_offset,
             const long long[::1] child_card,
             double[:, ::1] en_h,
             double[::1] en_c_flat):
    """One expectation sweep for a single hidden variable.

    Same contract as the numpy twin: accumulates posterior-weighted counts
    into ``en_h`` / ``en_c_flat`` and returns the hidden-part log-likelihood.
    """
    cdef long long n = hidden_cfg.shape[0]
    cdef long long n_children = child_stride.shape[0]
    cdef long long rh = theta_h.shape[1]
    cdef double ll = 0.0
    cdef double tot, p
    cdef long long m, h, c, idx
    cdef double *w = <double *> malloc(rh * sizeof(double))
    if w == NULL:
        raise MemoryError()
    try:
        for m in range(n):
            tot = 0.0
            for h in range(rh):
                p = theta_h[hidden_cfg[m], h]
                for c in range(n_children):
                    idx = child_offset[c] \
                        + (child_base[c, m] + child_stride[c] * h) * child_card[c] \
                        + child_code[c, m]
                    p *= theta_c_flat[idx]
                w[h] = p
                tot += p
            if tot > 0.0:
                ll += log(tot)
                for h in range(rh):
                    w[h] /= tot
            else:
                ll += LOG_FLOOR
                for h in range(rh):
                    w[h] = 1.0 / rh
            for h in range(rh):
                en_h[hidden_cfg[m], h] += w[h]
                for c in range(n_children):
                    idx = child_offset[c] \
                        + (child_base[c, m] + child_stride[c] * h) * child_card[c] \
                        + child_code[c, m]
                    en_c_flat[idx] += w[h]
    finally:
        free(w)
    return ll
