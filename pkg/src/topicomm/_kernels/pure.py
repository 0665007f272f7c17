"""NumPy reference implementation of the hot merge loops.

The compiled extension in ``_native.pyx`` mirrors these functions
operation for operation; both backends must produce identical merge
sequences for identical inputs.
"""

from __future__ import annotations

import numpy as np

NEG_INF = -np.inf


def semq_merge_loop(
    ssim: np.ndarray, st: np.ndarray, min_clusters: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, float]:
    """Greedy average-linkage merging driven by ``ssim`` with the semantic
    modularity of every intermediate partition tracked against ``st``.

    Clusters are identified by the position of their smallest member, the
    survivor of a merge is always the smaller position, and ties in the
    similarity scan resolve to the lexicographically smallest pair.

    Returns ``(a_idx, b_idx, sims, semqs, semq_initial)`` where step ``s``
    merged cluster ``b_idx[s]`` into ``a_idx[s]`` at working similarity
    ``sims[s]``, leaving a partition with semantic modularity ``semqs[s]``.
    """
    n = ssim.shape[0]
    n_merges = max(0, n - max(1, min_clusters))

    work = np.array(ssim, dtype=np.float64, copy=True)
    np.fill_diagonal(work, NEG_INF)
    t1 = np.array(st, dtype=np.float64, copy=True)
    t2 = t1 * t1

    size = np.ones(n, dtype=np.int64)
    win1 = np.zeros(n, dtype=np.float64)
    win2 = np.zeros(n, dtype=np.float64)
    sum_intra = float(n)
    sum_win2 = 0.0
    sum_within_pairs = 0
    total_pairs = n * (n - 1) // 2
    iu = np.triu_indices(n, k=1)
    total_sq = float(np.sum(t2[iu]))

    inter0 = (total_sq / total_pairs) / n if n >= 2 else 0.0
    semq_initial = 1.0 - inter0

    a_idx = np.empty(n_merges, dtype=np.int64)
    b_idx = np.empty(n_merges, dtype=np.int64)
    sims = np.empty(n_merges, dtype=np.float64)
    semqs = np.empty(n_merges, dtype=np.float64)

    n_clusters = n
    for step in range(n_merges):
        flat = int(np.argmax(work))
        a, b = divmod(flat, n)
        if a > b:  # symmetric matrix: the row-major scan hits i<j first
            a, b = b, a
        sim = work[a, b]

        sa, sb = int(size[a]), int(size[b])
        intra_a = 1.0 if sa == 1 else 2.0 * win1[a] / (sa * (sa - 1))
        intra_b = 1.0 if sb == 1 else 2.0 * win1[b] / (sb * (sb - 1))
        win1[a] += win1[b] + t1[a, b]
        win2[a] += win2[b] + t2[a, b]
        sn = sa + sb
        intra_new = 2.0 * win1[a] / (sn * (sn - 1))
        sum_intra += intra_new - intra_a - intra_b
        sum_win2 += t2[a, b]
        sum_within_pairs += sa * sb
        size[a] = sn

        t1[a, :] += t1[b, :]
        t1[:, a] = t1[a, :]
        t2[a, :] += t2[b, :]
        t2[:, a] = t2[a, :]

        work[a, :] = (work[a, :] + work[b, :]) * 0.5
        work[:, a] = work[a, :]
        work[a, a] = NEG_INF
        work[b, :] = NEG_INF
        work[:, b] = NEG_INF

        n_clusters -= 1
        intra = sum_intra / n_clusters
        m_cross = total_pairs - sum_within_pairs
        if n_clusters >= 2 and m_cross > 0:
            inter = ((total_sq - sum_win2) / m_cross) / n_clusters
        else:
            inter = 0.0

        a_idx[step] = a
        b_idx[step] = b
        sims[step] = sim
        semqs[step] = intra - inter

    return a_idx, b_idx, sims, semqs, semq_initial


def modularity_merge_loop(
    edge_i: np.ndarray, edge_j: np.ndarray, n: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Greedy modularity maximization over an unweighted simple graph.

    Starts from singleton communities and repeatedly applies the merge
    with the largest modularity gain until no merge improves modularity.
    Ties resolve to the lexicographically smallest position pair and the
    survivor is the smaller position.

    Returns ``(a_idx, b_idx, gains)`` for the applied merges.
    """
    m = len(edge_i)
    inv2m = 1.0 / (2.0 * m)
    frac = np.zeros((n, n), dtype=np.float64)
    for i, j in zip(edge_i, edge_j):
        frac[i, j] += inv2m
        frac[j, i] += inv2m
    ends = frac.sum(axis=1)

    masked = np.zeros((n, n), dtype=bool)
    np.fill_diagonal(masked, True)

    a_list: list[int] = []
    b_list: list[int] = []
    gains: list[float] = []
    while True:
        dq = 2.0 * (frac - np.outer(ends, ends))
        dq[masked] = NEG_INF
        flat = int(np.argmax(dq))
        a, b = divmod(flat, n)
        if a > b:
            a, b = b, a
        gain = dq[a, b]
        if not gain > 0.0:
            break

        frac[a, :] += frac[b, :]
        frac[:, a] = frac[a, :]
        frac[a, a] = 0.0
        frac[b, :] = 0.0
        frac[:, b] = 0.0
        ends[a] += ends[b]
        ends[b] = 0.0
        masked[b, :] = True
        masked[:, b] = True

        a_list.append(a)
        b_list.append(b)
        gains.append(gain)
        if len(a_list) == n - 1:
            break

    return (
        np.asarray(a_list, dtype=np.int64),
        np.asarray(b_list, dtype=np.int64),
        np.asarray(gains, dtype=np.float64),
    )
