"""Benchmark the compiled merge-loop kernels against the NumPy fallback.

Builds a seeded planted network, extracts the similarity matrices and the
user graph exactly as the pipeline does, then times the two hot loops on
both backends and checks they produce identical merge sequences.

Usage:
    python benchmarks/bench_kernels.py [--topics 6] [--events-per-topic 50]
                                       [--users-per-topic 80] [--repeats 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from topicomm._kernels import pure
from topicomm.graph import Config, prune_dataset, user_user_projection
from topicomm.pipeline import similarity_matrices
from topicomm.synthgen import PlantedSpec, generate_planted_esbn

try:
    from topicomm._kernels import _native
except ImportError:
    _native = None


def time_call(fn, *args, repeats: int) -> tuple[float, object]:
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--topics", type=int, default=6)
    parser.add_argument("--events-per-topic", type=int, default=50)
    parser.add_argument("--users-per-topic", type=int, default=80)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    if _native is None:
        print("compiled kernels unavailable; run `pip install -e .` first")
        return 1

    spec = PlantedSpec(
        n_topics=args.topics,
        events_per_topic=args.events_per_topic,
        users_per_topic=args.users_per_topic,
        rng_seed=args.seed,
        tag_noise=0.1,
    )
    dataset, _ = generate_planted_esbn(spec)
    cfg = Config(min_clusters=args.topics, svd_k=args.topics, rng_seed=args.seed)
    pruned = prune_dataset(dataset, cfg)
    _su, st, ssim, _ = similarity_matrices(pruned, cfg)
    graph = user_user_projection(pruned)

    n_events = len(ssim.items)
    index = {u: i for i, u in enumerate(graph.nodes)}
    edge_i = np.fromiter((index[u] for u, _ in graph.weighted_edges), dtype=np.int64)
    edge_j = np.fromiter((index[v] for _, v in graph.weighted_edges), dtype=np.int64)
    n_users = len(graph.nodes)

    print(f"instance: {n_events} events, {n_users} users, {len(edge_i)} user edges")
    print(f"{'kernel':<28}{'pure':>12}{'native':>12}{'speedup':>10}")

    w = np.ascontiguousarray(ssim.values)
    t = np.ascontiguousarray(st.values)
    t_pure, res_pure = time_call(
        pure.semq_merge_loop, w, t, cfg.min_clusters, repeats=args.repeats
    )
    t_native, res_native = time_call(
        _native.semq_merge_loop, w, t, cfg.min_clusters, repeats=args.repeats
    )
    assert np.array_equal(res_pure[0], res_native[0]), "merge sequences diverged"
    assert np.array_equal(res_pure[1], res_native[1])
    print(
        f"{'semq_merge_loop':<28}{t_pure * 1e3:>10.1f}ms{t_native * 1e3:>10.1f}ms"
        f"{t_pure / t_native:>9.1f}x"
    )

    t_pure, res_pure = time_call(
        pure.modularity_merge_loop, edge_i, edge_j, n_users, repeats=args.repeats
    )
    t_native, res_native = time_call(
        _native.modularity_merge_loop, edge_i, edge_j, n_users, repeats=args.repeats
    )
    assert np.array_equal(res_pure[0], res_native[0]), "merge sequences diverged"
    print(
        f"{'modularity_merge_loop':<28}{t_pure * 1e3:>10.1f}ms{t_native * 1e3:>10.1f}ms"
        f"{t_pure / t_native:>9.1f}x"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
