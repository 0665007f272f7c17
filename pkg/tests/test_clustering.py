from __future__ import annotations

import numpy as np
import pytest

from oracles import all_partitions, semq_direct
from topicomm.clustering import agglomerative_cluster, inter_sem, intra_sem, sem_q
from topicomm.graph import Config
from topicomm.similarity import KIND_COMBINED, KIND_SEMANTIC, SimilarityMatrix


def matrix(values, items=None, kind=KIND_SEMANTIC) -> SimilarityMatrix:
    values = np.asarray(values, dtype=float)
    items = items or tuple(f"e{i}" for i in range(len(values)))
    return SimilarityMatrix(items=tuple(items), values=values, kind=kind)


def pair_matrix(sim_ab, items=("a", "b")):
    return matrix([[1.0, sim_ab], [sim_ab, 1.0]], items=items)


class TestIntraSem:
    def test_single_pair_cluster(self):
        st = pair_matrix(0.6)
        assert intra_sem([{"a", "b"}], st) == pytest.approx(0.6)

    def test_two_singletons(self):
        st = pair_matrix(0.3)
        assert intra_sem([{"a"}, {"b"}], st) == pytest.approx(1.0)

    def test_mixed_cluster_sizes(self):
        st = matrix(
            [[1.0, 0.4, 0.0], [0.4, 1.0, 0.0], [0.0, 0.0, 1.0]],
            items=("a", "b", "c"),
        )
        assert intra_sem([{"a", "b"}, {"c"}], st) == pytest.approx(0.7)

    def test_rejects_non_partition(self):
        st = pair_matrix(0.2)
        with pytest.raises(ValueError):
            intra_sem([{"a"}], st)
        with pytest.raises(ValueError):
            intra_sem([{"a", "b"}, {"b"}], st)


class TestInterSem:
    def test_two_singletons(self):
        st = pair_matrix(0.5)
        assert inter_sem([{"a"}, {"b"}], st) == pytest.approx(0.125)

    def test_zero_cross_similarities(self):
        st = matrix(np.eye(3))
        assert inter_sem([{"e0"}, {"e1"}, {"e2"}], st) == pytest.approx(0.0)

    def test_three_singletons_unit_similarities(self):
        st = matrix(np.ones((3, 3)))
        assert inter_sem([{"e0"}, {"e1"}, {"e2"}], st) == pytest.approx(1.0 / 3.0)

    def test_single_cluster_defined_as_zero(self):
        st = pair_matrix(0.9)
        assert inter_sem([{"a", "b"}], st) == 0.0


class TestSemQ:
    def test_subtraction(self):
        st = matrix(
            [[1.0, 0.4, 0.5], [0.4, 1.0, 0.5], [0.5, 0.5, 1.0]],
            items=("a", "b", "c"),
        )
        # intra = (0.4 + 1)/2 = 0.7, inter = ((0.25 + 0.25)/2)/2 = 0.125
        assert sem_q([{"a", "b"}, {"c"}], st) == pytest.approx(0.575)

    def test_all_singletons_zero_cross(self):
        st = matrix(np.eye(4))
        parts = [{f"e{i}"} for i in range(4)]
        assert sem_q(parts, st) == pytest.approx(1.0)

    def test_single_cluster_uniform(self):
        s = 0.42
        values = np.full((4, 4), s)
        np.fill_diagonal(values, 1.0)
        st = matrix(values)
        assert sem_q([{f"e{i}" for i in range(4)}], st) == pytest.approx(s)

    def test_matches_direct_oracle_on_random_partitions(self):
        rng = np.random.default_rng(8)
        raw = rng.uniform(-1, 1, size=(6, 6))
        raw = (raw + raw.T) / 2
        np.fill_diagonal(raw, 1.0)
        st = matrix(raw)
        index = {item: i for i, item in enumerate(st.items)}
        for partition in all_partitions(list(st.items)):
            expected = semq_direct(partition, st.values, index)
            got = sem_q([set(g) for g in partition], st)
            assert got == pytest.approx(expected, abs=1e-12)


def two_pair_instance(jitter=0.0, seed=0):
    """Two separable event pairs: high within-pair similarity, low cross."""
    rng = np.random.default_rng(seed)
    items = ("e0", "e1", "e2", "e3")
    ssim = np.full((4, 4), 0.1)
    ssim[0, 1] = ssim[1, 0] = 0.9
    ssim[2, 3] = ssim[3, 2] = 0.9
    st = np.full((4, 4), 0.1)
    st[0, 1] = st[1, 0] = 0.95
    st[2, 3] = st[3, 2] = 0.95
    if jitter:
        noise = rng.uniform(-jitter, jitter, size=(4, 4))
        noise = (noise + noise.T) / 2
        ssim = ssim + noise
        st = np.clip(st + noise, -1, 1)
    np.fill_diagonal(ssim, 1.0)
    np.fill_diagonal(st, 1.0)
    return matrix(ssim, items, KIND_COMBINED), matrix(st, items)


class TestAgglomerative:
    def test_min_clusters_equal_to_events_returns_singletons(self):
        ssim, st = two_pair_instance()
        cs = agglomerative_cluster(ssim, st, Config(min_clusters=4))
        assert cs.merge_trace == ()
        assert cs.clusters == tuple(frozenset({e}) for e in ssim.items)
        assert cs.best_semq == pytest.approx(cs.semq_initial)

    def test_two_pairs_recovered_and_match_exhaustive_search(self):
        ssim, st = two_pair_instance()
        cs = agglomerative_cluster(ssim, st, Config(min_clusters=2))
        merged = {(step.first, step.second) for step in cs.merge_trace[:2]}
        assert merged == {("e0", "e1"), ("e2", "e3")}
        assert set(cs.clusters) == {frozenset({"e0", "e1"}), frozenset({"e2", "e3"})}

        index = {item: i for i, item in enumerate(st.items)}
        best = max(
            all_partitions(list(st.items)),
            key=lambda p: semq_direct(p, st.values, index),
        )
        assert {frozenset(g) for g in best} == set(cs.clusters)

    def test_uniform_similarity_uses_deterministic_tie_break(self):
        values = np.full((4, 4), 0.5)
        np.fill_diagonal(values, 1.0)
        ssim = matrix(values, kind=KIND_COMBINED)
        st = matrix(values)
        cs = agglomerative_cluster(ssim, st, Config(min_clusters=2))
        assert [(s.first, s.second) for s in cs.merge_trace] == [
            ("e0", "e1"),
            ("e0", "e2"),
        ]

    def test_empty_matrix_rejected(self):
        empty = SimilarityMatrix(items=(), values=np.zeros((0, 0)), kind=KIND_COMBINED)
        with pytest.raises(ValueError, match="empty"):
            agglomerative_cluster(empty, empty, Config())

    def test_trace_semq_matches_scratch_recomputation(self):
        rng = np.random.default_rng(2)
        raw = rng.uniform(0, 1, size=(7, 7))
        raw = (raw + raw.T) / 2
        np.fill_diagonal(raw, 1.0)
        ssim = matrix(raw, kind=KIND_COMBINED)
        st = matrix(raw.copy())
        cs = agglomerative_cluster(ssim, st, Config(min_clusters=1))

        # replay the trace and recompute SemQ from scratch after each merge
        clusters = {item: {item} for item in ssim.items}
        for step in cs.merge_trace:
            clusters[step.first] |= clusters.pop(step.second)
            scratch = sem_q(list(clusters.values()), st)
            assert step.semq_after == pytest.approx(scratch, abs=1e-9)

    def test_best_state_bookkeeping(self):
        ssim, st = two_pair_instance()
        cs = agglomerative_cluster(ssim, st, Config(min_clusters=2))
        trace_values = [step.semq_after for step in cs.merge_trace]
        assert cs.best_semq == pytest.approx(max(trace_values))
        assert cs.best_semq >= trace_values[-1] - 1e-12
        assert sem_q(cs.best_clusters, st) == pytest.approx(cs.best_semq, abs=1e-9)
        # the best state here is the final two-pair partition
        assert cs.best_step == len(cs.merge_trace)
        assert set(cs.best_clusters) == set(cs.clusters)

    def test_unsorted_items_break_ties_by_id(self):
        values = np.full((3, 3), 0.5)
        np.fill_diagonal(values, 1.0)
        ssim = matrix(values, items=("z", "m", "a"), kind=KIND_COMBINED)
        st = matrix(values, items=("z", "m", "a"))
        cs = agglomerative_cluster(ssim, st, Config(min_clusters=2))
        assert (cs.merge_trace[0].first, cs.merge_trace[0].second) == ("a", "m")

    def test_deterministic(self):
        ssim, st = two_pair_instance(jitter=0.02, seed=5)
        cfg = Config(min_clusters=2)
        first = agglomerative_cluster(ssim, st, cfg)
        second = agglomerative_cluster(ssim, st, cfg)
        assert first.merge_trace == second.merge_trace
        assert first.clusters == second.clusters

    def test_partition_at_every_step(self):
        ssim, st = two_pair_instance(jitter=0.05, seed=9)
        cs = agglomerative_cluster(ssim, st, Config(min_clusters=1))
        clusters = {item: {item} for item in ssim.items}
        seen = set(ssim.items)
        for step in cs.merge_trace:
            clusters[step.first] |= clusters.pop(step.second)
            all_members = [m for group in clusters.values() for m in group]
            assert sorted(all_members) == sorted(seen)
