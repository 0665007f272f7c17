# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled merge loops.

Mirrors ``pure.py`` operation for operation: initialization uses the same
NumPy expressions and the per-merge scalar updates are the same IEEE
operations, so both backends produce identical merge sequences.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double NEG_INF = -np.inf


cdef inline void _rescan_row(
    double[:, ::1] w,
    cnp.uint8_t[::1] active,
    double[::1] rowmax,
    cnp.int64_t[::1] rowarg,
    Py_ssize_t i,
    Py_ssize_t n,
) noexcept:
    cdef double best = NEG_INF
    cdef Py_ssize_t arg = -1
    cdef Py_ssize_t j
    for j in range(i + 1, n):
        if active[j] and w[i, j] > best:
            best = w[i, j]
            arg = j
    rowmax[i] = best
    rowarg[i] = arg


def semq_merge_loop(object ssim_in, object st_in, long min_clusters):
    """See ``topicomm._kernels.pure.semq_merge_loop``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] work_arr = np.array(
        ssim_in, dtype=np.float64, copy=True, order="C")
    cdef cnp.ndarray[cnp.float64_t, ndim=2] t1_arr = np.array(
        st_in, dtype=np.float64, copy=True, order="C")
    cdef cnp.ndarray[cnp.float64_t, ndim=2] t2_arr = t1_arr * t1_arr

    cdef Py_ssize_t n = work_arr.shape[0]
    cdef long floor = min_clusters if min_clusters > 1 else 1
    cdef Py_ssize_t n_merges = n - floor if n > floor else 0

    np.fill_diagonal(work_arr, NEG_INF)
    iu = np.triu_indices(n, k=1)
    cdef double total_sq = float(np.sum(t2_arr[iu]))
    cdef double total_pairs = n * (n - 1) // 2

    cdef cnp.ndarray[cnp.int64_t, ndim=1] size_arr = np.ones(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] win1_arr = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] win2_arr = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] active_arr = np.ones(n, dtype=np.uint8)

    cdef cnp.ndarray[cnp.int64_t, ndim=1] a_out = np.empty(n_merges, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] b_out = np.empty(n_merges, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sim_out = np.empty(n_merges, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] semq_out = np.empty(n_merges, dtype=np.float64)

    cdef double[:, ::1] w = work_arr
    cdef double[:, ::1] t1 = t1_arr
    cdef double[:, ::1] t2 = t2_arr
    cdef cnp.int64_t[::1] size = size_arr
    cdef double[::1] win1 = win1_arr
    cdef double[::1] win2 = win2_arr
    cdef cnp.uint8_t[::1] active = active_arr

    cdef double sum_intra = <double> n
    cdef double sum_win2 = 0.0
    cdef double sum_within_pairs = 0.0
    cdef double inter0 = (total_sq / total_pairs) / n if n >= 2 else 0.0
    cdef double semq_initial = 1.0 - inter0

    # cached maximum of each active upper-triangle row (value and the
    # smallest column attaining it); selection then matches a full scan
    # that keeps the lexicographically smallest argmax pair
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rowmax_arr = np.full(n, NEG_INF)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] rowarg_arr = np.full(n, -1, dtype=np.int64)
    cdef double[::1] rowmax = rowmax_arr
    cdef cnp.int64_t[::1] rowarg = rowarg_arr

    cdef Py_ssize_t step, i, j, k, a, b
    cdef long n_clusters = <long> n
    cdef double best, sim, intra_a, intra_b, intra_new, intra, inter, m_cross
    cdef long sa, sb, sn

    for i in range(n):
        _rescan_row(w, active, rowmax, rowarg, i, n)

    for step in range(n_merges):
        best = NEG_INF
        a = -1
        for i in range(n):
            if active[i] and rowarg[i] >= 0 and rowmax[i] > best:
                best = rowmax[i]
                a = i
        b = rowarg[a]
        sim = best

        sa = size[a]
        sb = size[b]
        intra_a = 1.0 if sa == 1 else 2.0 * win1[a] / (sa * (sa - 1))
        intra_b = 1.0 if sb == 1 else 2.0 * win1[b] / (sb * (sb - 1))
        win1[a] += win1[b] + t1[a, b]
        win2[a] += win2[b] + t2[a, b]
        sn = sa + sb
        intra_new = 2.0 * win1[a] / (sn * (sn - 1))
        sum_intra += intra_new - intra_a - intra_b
        sum_win2 += t2[a, b]
        sum_within_pairs += <double> (sa * sb)
        size[a] = sn

        for k in range(n):
            t1[a, k] += t1[b, k]
            t2[a, k] += t2[b, k]
        for k in range(n):
            t1[k, a] = t1[a, k]
            t2[k, a] = t2[a, k]

        for k in range(n):
            w[a, k] = (w[a, k] + w[b, k]) * 0.5
        for k in range(n):
            w[k, a] = w[a, k]
        w[a, a] = NEG_INF
        for k in range(n):
            w[b, k] = NEG_INF
            w[k, b] = NEG_INF

        active[b] = 0
        n_clusters -= 1

        # refresh the row-max cache: the merged row changed entirely, rows
        # before it see a new column value, and any row whose maximum sat
        # in column a or b must be rescanned
        _rescan_row(w, active, rowmax, rowarg, a, n)
        for i in range(n):
            if not active[i] or i == a:
                continue
            if rowarg[i] == a or rowarg[i] == b:
                _rescan_row(w, active, rowmax, rowarg, i, n)
            elif i < a:
                if w[i, a] > rowmax[i] or (w[i, a] == rowmax[i] and a < rowarg[i]):
                    rowmax[i] = w[i, a]
                    rowarg[i] = a
        intra = sum_intra / n_clusters
        m_cross = total_pairs - sum_within_pairs
        if n_clusters >= 2 and m_cross > 0:
            inter = ((total_sq - sum_win2) / m_cross) / n_clusters
        else:
            inter = 0.0

        a_out[step] = a
        b_out[step] = b
        sim_out[step] = sim
        semq_out[step] = intra - inter

    return a_out, b_out, sim_out, semq_out, semq_initial


def modularity_merge_loop(object edge_i_in, object edge_j_in, long n_in):
    """See ``topicomm._kernels.pure.modularity_merge_loop``."""
    cdef cnp.ndarray[cnp.int64_t, ndim=1] edge_i = np.asarray(edge_i_in, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] edge_j = np.asarray(edge_j_in, dtype=np.int64)
    cdef Py_ssize_t n = n_in
    cdef Py_ssize_t m = edge_i.shape[0]
    cdef double inv2m = 1.0 / (2.0 * m)

    cdef cnp.ndarray[cnp.float64_t, ndim=2] frac_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] frac = frac_arr
    cdef Py_ssize_t e, i, j, k, a, b
    for e in range(m):
        i = edge_i[e]
        j = edge_j[e]
        frac[i, j] += inv2m
        frac[j, i] += inv2m
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ends_arr = frac_arr.sum(axis=1)
    cdef double[::1] ends = ends_arr
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] active_arr = np.ones(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] active = active_arr

    a_list = []
    b_list = []
    gains = []
    cdef double best, gain
    cdef Py_ssize_t merges = 0
    while True:
        best = NEG_INF
        a = -1
        b = -1
        for i in range(n):
            if not active[i]:
                continue
            for j in range(i + 1, n):
                if not active[j]:
                    continue
                gain = 2.0 * (frac[i, j] - ends[i] * ends[j])
                if gain > best:
                    best = gain
                    a = i
                    b = j
        if a < 0 or not best > 0.0:
            break

        for k in range(n):
            frac[a, k] += frac[b, k]
        for k in range(n):
            frac[k, a] = frac[a, k]
        frac[a, a] = 0.0
        for k in range(n):
            frac[b, k] = 0.0
            frac[k, b] = 0.0
        ends[a] += ends[b]
        ends[b] = 0.0
        active[b] = 0

        a_list.append(a)
        b_list.append(b)
        gains.append(best)
        merges += 1
        if merges == n - 1:
            break

    return (
        np.asarray(a_list, dtype=np.int64),
        np.asarray(b_list, dtype=np.int64),
        np.asarray(gains, dtype=np.float64),
    )
