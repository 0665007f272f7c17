"""Agglomerative event clustering with the semantic-modularity trace."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import Config
from .similarity import SimilarityMatrix


@dataclass(frozen=True)
class MergeStep:
    """One merge: ``second`` absorbed into ``first`` (smallest-member ids)."""

    first: str
    second: str
    similarity: float
    semq_after: float


@dataclass(frozen=True)
class ClusterSet:
    """Result of the merge loop.

    ``clusters`` is the final partition (the loop runs down to the
    configured cluster floor); ``best_clusters`` is the intermediate
    partition with the highest semantic modularity seen along the trace,
    kept for diagnostics and verification.
    """

    clusters: tuple[frozenset[str], ...]
    merge_trace: tuple[MergeStep, ...]
    best_semq: float
    best_step: int
    semq_initial: float
    best_clusters: tuple[frozenset[str], ...]

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)


def _positions(clusters, items: tuple[str, ...]) -> list[np.ndarray]:
    index = {item: i for i, item in enumerate(items)}
    seen: set[int] = set()
    out = []
    for cluster in clusters:
        if not cluster:
            raise ValueError("empty cluster in partition")
        pos = []
        for item in cluster:
            if item not in index:
                raise ValueError(f"unknown item {item!r} in partition")
            p = index[item]
            if p in seen:
                raise ValueError(f"item {item!r} appears in two clusters")
            seen.add(p)
            pos.append(p)
        out.append(np.asarray(sorted(pos), dtype=np.intp))
    if len(seen) != len(items):
        raise ValueError("clusters do not cover all items")
    return out


def intra_sem(clusters, st: SimilarityMatrix) -> float:
    """Mean over clusters of the average pairwise semantic similarity
    inside each cluster; singletons count as perfectly self-similar."""
    groups = _positions(clusters, st.items)
    values = st.values
    total = 0.0
    for pos in groups:
        k = len(pos)
        if k == 1:
            total += 1.0
        else:
            sub = values[np.ix_(pos, pos)]
            total += (sub.sum() - np.trace(sub)) / (k * (k - 1))
    return total / len(groups)


def inter_sem(clusters, st: SimilarityMatrix) -> float:
    """Mean squared cross-cluster similarity, divided by the number of
    clusters. Defined as 0 for a single cluster."""
    groups = _positions(clusters, st.items)
    if len(groups) < 2:
        return 0.0
    n = len(st.items)
    sq = st.values * st.values
    iu = np.triu_indices(n, k=1)
    total_sq = float(np.sum(sq[iu]))
    within_sq = 0.0
    within_pairs = 0
    for pos in groups:
        k = len(pos)
        if k > 1:
            sub = sq[np.ix_(pos, pos)]
            within_sq += (sub.sum() - np.trace(sub)) / 2.0
            within_pairs += k * (k - 1) // 2
    m_cross = n * (n - 1) // 2 - within_pairs
    if m_cross == 0:
        return 0.0
    return ((total_sq - within_sq) / m_cross) / len(groups)


def sem_q(clusters, st: SimilarityMatrix) -> float:
    """Semantic modularity: intra-cluster cohesion minus the normalized
    squared cross-cluster similarity."""
    return intra_sem(clusters, st) - inter_sem(clusters, st)


def _labels_after(a_idx: np.ndarray, b_idx: np.ndarray, n: int, steps: int) -> np.ndarray:
    labels = np.arange(n)
    for s in range(steps):
        labels[labels == b_idx[s]] = a_idx[s]
    return labels


def _clusters_from_labels(
    labels: np.ndarray, items: tuple[str, ...]
) -> tuple[frozenset[str], ...]:
    groups: dict[int, list[str]] = {}
    for pos, label in enumerate(labels):
        groups.setdefault(int(label), []).append(items[pos])
    return tuple(frozenset(groups[k]) for k in sorted(groups))


def agglomerative_cluster(
    ssim: SimilarityMatrix, st: SimilarityMatrix, cfg: Config
) -> ClusterSet:
    """Merge the most similar event clusters until ``cfg.min_clusters``
    remain, averaging the working similarities of merged clusters.

    The semantic modularity of every intermediate partition is recorded;
    a later state only replaces the running best when it improves it by
    more than ``cfg.epsilon``. The final partition is returned as the
    clustering result and the best-scoring one is kept alongside it.
    """
    if ssim.items != st.items:
        raise ValueError("similarity matrices have different item orderings")
    n = len(ssim.items)
    if n == 0:
        raise ValueError("empty similarity matrix")

    order = np.argsort(np.asarray(ssim.items, dtype=object))
    items = tuple(ssim.items[i] for i in order)
    w = np.ascontiguousarray(ssim.values[np.ix_(order, order)], dtype=np.float64)
    t = np.ascontiguousarray(st.values[np.ix_(order, order)], dtype=np.float64)

    a_idx, b_idx, sims, semqs, semq_initial = _kernels.semq_merge_loop(
        w, t, cfg.min_clusters
    )
    n_merges = len(a_idx)

    trace = tuple(
        MergeStep(
            first=items[int(a_idx[s])],
            second=items[int(b_idx[s])],
            similarity=float(sims[s]),
            semq_after=float(semqs[s]),
        )
        for s in range(n_merges)
    )

    if n_merges == 0:
        singletons = tuple(frozenset({item}) for item in items)
        return ClusterSet(
            clusters=singletons,
            merge_trace=(),
            best_semq=semq_initial,
            best_step=0,
            semq_initial=semq_initial,
            best_clusters=singletons,
        )

    best = 0
    for s in range(1, n_merges):
        if semqs[s] > semqs[best] + cfg.epsilon:
            best = s
    best_step = best + 1

    final_labels = _labels_after(a_idx, b_idx, n, n_merges)
    best_labels = _labels_after(a_idx, b_idx, n, best_step)
    return ClusterSet(
        clusters=_clusters_from_labels(final_labels, items),
        merge_trace=trace,
        best_semq=float(semqs[best]),
        best_step=best_step,
        semq_initial=semq_initial,
        best_clusters=_clusters_from_labels(best_labels, items),
    )


def trace_records(cs: ClusterSet) -> list[dict]:
    """Merge trace as JSON-ready records."""
    return [
        {
            "step": s + 1,
            "merged_into": step.first,
            "absorbed": step.second,
            "similarity": step.similarity,
            "semq_after": step.semq_after,
        }
        for s, step in enumerate(cs.merge_trace)
    ]
