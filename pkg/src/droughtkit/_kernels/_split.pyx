# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled best-split scan for the tree models.

Mirrors droughtkit._kernels.pure.best_split; see that module for the
contract. The presorted index table turns each node scan into a single
O(N) pass per feature with no sorting or allocation in the loop.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def best_split(double[:, ::1] X, double[::1] y, double[::1] w,
               int[:, ::1] sort_idx, long[::1] feature_ids, double min_leaf):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t nf = feature_ids.shape[0]
    cdef Py_ssize_t fi, i, j
    cdef long f
    cdef double n_tot, s_tot, ss_tot
    cdef double nl, sl, nr, sr
    cdef double wi, yi, xv, prev_x, gain, base
    cdef int best_feat = -1
    cdef double best_thr = 0.0
    cdef double best_gain = 0.0
    cdef bint have_best = 0
    cdef bint started

    n_tot = 0.0
    s_tot = 0.0
    for i in range(n):
        wi = w[i]
        if wi > 0:
            n_tot += wi
            s_tot += wi * y[i]
    if n_tot < 2 * min_leaf:
        return (-1, float("nan"), 0.0)
    base = s_tot * s_tot / n_tot

    for fi in range(nf):
        f = feature_ids[fi]

        nl = 0.0
        sl = 0.0
        started = 0
        prev_x = 0.0
        for i in range(n):
            j = sort_idx[i, f]
            wi = w[j]
            if wi <= 0:
                continue
            xv = X[j, f]
            if started and xv > prev_x:
                nr = n_tot - nl
                if nl >= min_leaf and nr >= min_leaf:
                    sr = s_tot - sl
                    gain = sl * sl / nl + sr * sr / nr - base
                    if gain > best_gain:
                        best_gain = gain
                        best_feat = <int>f
                        best_thr = 0.5 * (prev_x + xv)
                        have_best = 1
            nl += wi
            sl += wi * y[j]
            prev_x = xv
            started = 1

    if not have_best:
        return (-1, float("nan"), 0.0)
    return (best_feat, best_thr, best_gain)
