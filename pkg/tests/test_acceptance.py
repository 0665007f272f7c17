"""Acceptance suite.

Each test implements one acceptance criterion at its stated tolerance and
prints a single pass line when it holds (run with ``pytest -v -s`` to see
them). Planted-data runs use the topic count as the cluster floor, the
same way a caller who knows the number of topics drives the detector, and
k = number-of-topics latent dimensions.
"""

from __future__ import annotations

import itertools
import time
from collections import Counter

import numpy as np
import pytest
from sklearn.metrics import normalized_mutual_info_score

from oracles import (
    all_partitions,
    pairwise_modularity,
    semq_direct,
    singular_values_via_gram,
)
from test_embedding import bipartite_from_dense, random_bipartite
from test_metrics import community, community_set, graph_from_edges
from topicomm.baseline import greedy_modularity
from topicomm.clustering import agglomerative_cluster, sem_q
from topicomm.graph import Config
from topicomm.membership import assignment_score
from topicomm.metrics import (
    TopicMap,
    conductance,
    newman_q,
    project_disjoint,
    purity,
    purq_beta,
)
from topicomm.pipeline import detect_communities, run_detect
from topicomm.similarity import KIND_COMBINED, KIND_SEMANTIC, SimilarityMatrix
from topicomm.synthgen import PlantedSpec, generate_planted_esbn, write_planted_tsv
from topicomm.embedding import normalize_bipartite, truncated_svd

PLANTED_CFG = Config(alpha=0.3, min_clusters=4, svd_k=4, rng_seed=7)


def report(number: int, detail: str) -> None:
    print(f"acceptance criterion {number}: PASS ({detail})", flush=True)


def event_cluster_purity(clusters, event_topic) -> float:
    total = 0
    count = 0
    for cluster in clusters:
        topics = Counter(event_topic[e] for e in cluster)
        total += max(topics.values())
        count += sum(topics.values())
    return total / count


def test_criterion_1_modularity_oracle():
    rng = np.random.default_rng(1001)
    started = time.perf_counter()
    checked = 0
    while checked < 200:
        n = int(rng.integers(2, 13))
        nodes = [f"n{i}" for i in range(n)]
        edges = [
            (a, b)
            for a, b in itertools.combinations(nodes, 2)
            if rng.random() < 0.4
        ]
        if not edges:
            continue
        labels = {u: int(rng.integers(1, n + 1)) for u in nodes}
        groups: dict[int, set] = {}
        for u, g in labels.items():
            groups.setdefault(g, set()).add(u)
        cs = community_set(
            *(
                community(cid, groups[key])
                for cid, key in enumerate(sorted(groups))
            )
        )
        relabeled = {
            u: cid
            for cid, key in enumerate(sorted(groups))
            for u in groups[key]
        }
        graph = graph_from_edges(edges, extra_nodes=nodes)
        got = newman_q(cs, graph)
        expected = pairwise_modularity(edges, relabeled)
        assert abs(got - expected) <= 1e-12
        checked += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0
    report(1, f"200 graphs vs pairwise oracle, max tol 1e-12, {elapsed:.2f}s")


def test_criterion_2_svd_oracle():
    rng = np.random.default_rng(2002)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 21))
        m = int(rng.integers(2, 21))
        dense = rng.random((n, m))
        k = min(n, m) - 1
        svd = truncated_svd(bipartite_from_dense(dense), k=k)
        expected = singular_values_via_gram(dense)[: k + 1]
        worst = max(worst, float(np.abs(svd.values - expected).max()))
        assert np.abs(svd.values - expected).max() <= 1e-8
        gram = svd.right.T @ svd.right
        assert np.abs(gram - np.eye(k + 1)).max() <= 1e-8

    for _ in range(50):
        mat = random_bipartite(rng, int(rng.integers(3, 15)), int(rng.integers(3, 15)))
        svd = truncated_svd(normalize_bipartite(mat), k=1)
        assert abs(svd.values[0] - 1.0) <= 1e-8
    report(2, f"50 matrices vs Gram-Jacobi oracle, worst sigma error {worst:.2e}")


def _random_semq_instance(rng, n):
    ssim = rng.uniform(-0.3, 1.0, size=(n, n))
    ssim = (ssim + ssim.T) / 2
    np.fill_diagonal(ssim, 1.0)
    st = rng.uniform(-0.6, 1.0, size=(n, n))
    st = (st + st.T) / 2
    np.fill_diagonal(st, 1.0)
    items = tuple(f"e{i}" for i in range(n))
    return (
        SimilarityMatrix(items, ssim, KIND_COMBINED),
        SimilarityMatrix(items, st, KIND_SEMANTIC),
    )


def _two_block_instance(rng, n):
    half = n // 2
    items = tuple(f"e{i}" for i in range(n))
    within, cross = 0.96, 0.05
    base = np.full((n, n), cross)
    base[:half, :half] = within
    base[half:, half:] = within
    jitter = rng.uniform(-0.01, 0.01, size=(n, n))
    jitter = (jitter + jitter.T) / 2
    st = np.clip(base + jitter, -1.0, 1.0)
    ssim = np.clip(base + jitter, -1.0, 1.0)
    np.fill_diagonal(st, 1.0)
    np.fill_diagonal(ssim, 1.0)
    return (
        SimilarityMatrix(items, ssim, KIND_COMBINED),
        SimilarityMatrix(items, st, KIND_SEMANTIC),
        {frozenset(items[:half]), frozenset(items[half:])},
    )


def test_criterion_3_semq_oracle():
    rng = np.random.default_rng(3003)
    worst = 0.0
    for n in (4, 5, 6):
        for _ in range(10):
            ssim, st = _random_semq_instance(rng, n)
            cs = agglomerative_cluster(ssim, st, Config(min_clusters=1))
            scratch = sem_q(cs.best_clusters, st)
            worst = max(worst, abs(cs.best_semq - scratch))
            assert abs(cs.best_semq - scratch) <= 1e-9

    for n in (4, 6):
        for _ in range(5):
            ssim, st, blocks = _two_block_instance(rng, n)
            cs = agglomerative_cluster(ssim, st, Config(min_clusters=2))
            assert set(cs.clusters) == blocks
            index = {item: i for i, item in enumerate(st.items)}
            best = max(
                all_partitions(list(st.items)),
                key=lambda p: semq_direct(p, st.values, index),
            )
            assert {frozenset(g) for g in best} == set(cs.clusters)
    report(3, f"30 trace instances (worst drift {worst:.1e}) + 10 exhaustive matches")


def test_criterion_4_planted_recovery(tmp_path):
    started = time.perf_counter()
    spec = PlantedSpec(
        n_topics=4, events_per_topic=10, users_per_topic=50,
        p_in=0.3, p_out=0.01, tag_noise=0.05, rng_seed=7,
    )
    dataset, truth = generate_planted_esbn(spec)
    write_planted_tsv(dataset, truth, tmp_path)
    run_detect(tmp_path, tmp_path / "out", PLANTED_CFG)

    result = detect_communities(dataset, PLANTED_CFG)
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0

    cluster_purity = event_cluster_purity(result.clusters.clusters, truth.event_topic)
    assert cluster_purity >= 0.9

    projection = project_disjoint(result.communities)
    users = sorted(projection)
    nmi = normalized_mutual_info_score(
        [truth.user_topic[u] for u in users], [projection[u] for u in users]
    )
    assert nmi >= 0.8
    report(
        4,
        f"purity={cluster_purity:.3f} nmi={nmi:.3f} runtime={elapsed:.1f}s",
    )


def _planted_run(seed: int, alpha: float):
    spec = PlantedSpec(rng_seed=seed)
    dataset, truth = generate_planted_esbn(spec)
    cfg = Config(alpha=alpha, min_clusters=4, svd_k=4, rng_seed=seed)
    result = detect_communities(dataset, cfg)
    tm = TopicMap(dict(truth.tag_topic))
    _, mean_purity = purity(result.communities, tm, result.pruned)
    q = newman_q(result.communities, result.graph)
    return mean_purity, q


def test_criterion_5_alpha_trend():
    alphas = (0.0, 0.25, 0.5, 0.75, 1.0)
    seeds = (1, 2, 3, 4, 5)
    purities = {a: [] for a in alphas}
    qs = {a: [] for a in alphas}
    for seed in seeds:
        for alpha in alphas:
            p, q = _planted_run(seed, alpha)
            purities[alpha].append(p)
            qs[alpha].append(q)

    mean_p = {a: float(np.mean(purities[a])) for a in alphas}
    mean_q = {a: float(np.mean(qs[a])) for a in alphas}
    assert mean_q[1.0] >= mean_q[0.0]
    assert mean_p[0.0] >= mean_p[1.0]

    purq = {a: purq_beta(mean_p[a], mean_q[a], 0.5) for a in alphas}
    peak = max(alphas, key=lambda a: (purq[a], -a))
    assert peak <= 0.5
    report(
        5,
        f"Q {mean_q[0.0]:.3f}->{mean_q[1.0]:.3f}, purity {mean_p[0.0]:.3f}->"
        f"{mean_p[1.0]:.3f}, PurQ(0.5) peak at alpha={peak}",
    )


def test_criterion_6_formula_fixed_points():
    for x in np.arange(0.1, 0.95, 0.1):
        for beta in (0.5, 1.0, 2.0):
            assert abs(purq_beta(float(x), float(x), beta) - x) <= 1e-12

    rng = np.random.default_rng(6006)
    checked = 0
    while checked < 100:
        n = int(rng.integers(4, 16))
        nodes = [f"n{i}" for i in range(n)]
        edges = [
            (a, b)
            for a, b in itertools.combinations(nodes, 2)
            if rng.random() < 0.3
        ]
        if not edges:
            continue
        graph = graph_from_edges(edges, extra_nodes=nodes)
        size = int(rng.integers(1, n))
        members = set(rng.choice(nodes, size=size, replace=False))
        rest = set(nodes) - members
        assert conductance(members, graph) == conductance(rest, graph)
        checked += 1

    spec = PlantedSpec(rng_seed=7)
    dataset, _ = generate_planted_esbn(spec)
    result = detect_communities(dataset, PLANTED_CFG)
    cluster_users = {
        idx: frozenset().union(*(result.pruned.event_users()[e] for e in cluster))
        for idx, cluster in enumerate(result.clusters.clusters)
    }
    user_events = result.pruned.user_events()
    cluster_of_event = {
        e: idx for idx, cluster in enumerate(result.clusters.clusters) for e in cluster
    }
    pairs = 0
    for user in sorted(result.pruned.users):
        for idx in {cluster_of_event[e] for e in user_events[user]}:
            score = assignment_score(user, cluster_users[idx], result.graph)
            assert 0.0 <= score <= 1.0
            pairs += 1
    report(6, f"PurQ fixed points exact, 100 complements equal, {pairs} scores in [0,1]")


def test_criterion_7_determinism(tmp_path):
    spec = PlantedSpec(rng_seed=7)
    dataset, truth = generate_planted_esbn(spec)
    data_dir = tmp_path / "data"
    write_planted_tsv(dataset, truth, data_dir)

    out1, out2 = tmp_path / "run1", tmp_path / "run2"
    run_detect(data_dir, out1, PLANTED_CFG)
    run_detect(data_dir, out2, PLANTED_CFG)
    for name in ("communities.json", "report.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    report(7, "communities.json and report.json byte-identical across reruns")


def test_criterion_8_baseline_sanity():
    left = ["a", "b", "c", "d"]
    right = ["w", "x", "y", "z"]
    edges = (
        list(itertools.combinations(left, 2))
        + list(itertools.combinations(right, 2))
        + [("d", "w")]
    )
    graph = graph_from_edges(edges)
    baseline = greedy_modularity(graph)
    assert {frozenset(c.user_ids) for c in baseline.communities} == {
        frozenset(left),
        frozenset(right),
    }
    best_q = max(
        pairwise_modularity(edges, {u: i for i, part in enumerate(p) for u in part})
        for p in all_partitions(sorted(left + right))
    )
    assert newman_q(baseline, graph) == pytest.approx(best_q, abs=1e-12)

    spec = PlantedSpec(
        n_topics=8, events_per_topic=8, users_per_topic=25,
        tags_per_topic=8, tag_noise=0.3, rng_seed=7,
    )
    dataset, _ = generate_planted_esbn(spec)
    cfg = Config(alpha=0.3, min_clusters=8, svd_k=8, rng_seed=7)
    result = detect_communities(dataset, cfg)
    topical_sizes = [len(c.user_ids) for c in result.communities.communities]
    baseline_cs = greedy_modularity(result.graph)
    baseline_sizes = [len(c.user_ids) for c in baseline_cs.communities]
    assert np.mean(baseline_sizes) >= np.mean(topical_sizes)
    report(
        8,
        f"cliques recovered; baseline mean size {np.mean(baseline_sizes):.1f} >= "
        f"topical {np.mean(topical_sizes):.1f}",
    )
