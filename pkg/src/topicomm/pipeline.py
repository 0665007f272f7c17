"""End-to-end detection workflows shared by the CLI and the test suite."""

from __future__ import annotations

import csv
import json
import logging
from collections import Counter
from dataclasses import asdict, replace
from pathlib import Path
from typing import NamedTuple

from .baseline import greedy_modularity
from .clustering import ClusterSet, agglomerative_cluster, trace_records
from .embedding import (
    LatentEmbedding,
    event_tag_matrix,
    event_user_matrix,
    latent_embedding,
    normalize_bipartite,
    truncated_svd,
    write_embedding_tsv,
)
from .graph import (
    TAG_TOPIC_FILE,
    Config,
    Dataset,
    UserGraph,
    load_dataset,
    prune_dataset,
    user_user_projection,
)
from .membership import Community, CommunitySet, assign_users
from .metrics import (
    MetricsReport,
    compute_report,
    conductance,
    friend_fraction,
    load_topic_map,
    newman_q,
    profile_similarity_fraction,
)
from .similarity import (
    KIND_SEMANTIC,
    KIND_USER,
    SimilarityMatrix,
    candidate_pairs,
    combine_similarities,
    cosine_similarity_matrix,
    restrict_to_candidates,
    write_similarity_tsv,
)

logger = logging.getLogger(__name__)

CSV_FIELDS = [
    "alpha", "beta", "rng_seed", "svd_k", "min_clusters", "epsilon",
    "min_tag_freq", "min_shared", "profile_theta",
    "purity", "f_purity", "q", "purq", "silhouette",
    "friend_fraction", "profile_fraction",
    "n_communities", "dropped_empty", "mean_community_size", "best_semq",
]


def _effective_k(requested: int, shape: tuple[int, int], label: str) -> int:
    cap = min(shape) - 1
    if cap < 1:
        raise ValueError(f"{label} matrix {shape} is too small for an embedding")
    if requested > cap:
        logger.warning(
            "svd_k=%d exceeds the %s matrix %s; using k=%d",
            requested, label, shape, cap,
        )
        return cap
    return requested


def event_embeddings(
    dataset: Dataset, cfg: Config
) -> tuple[LatentEmbedding, LatentEmbedding, dict]:
    """Latent event coordinates in the user and semantic spaces.

    The leading singular value of each normalized matrix must be 1; it is
    checked here and echoed in the run parameters.
    """
    mat_u = event_user_matrix(dataset)
    mat_t = event_tag_matrix(dataset)
    k_u = _effective_k(cfg.svd_k, mat_u.shape, "event-user")
    k_t = _effective_k(cfg.svd_k, mat_t.shape, "event-tag")
    svd_u = truncated_svd(normalize_bipartite(mat_u), k_u, cfg.rng_seed)
    svd_t = truncated_svd(normalize_bipartite(mat_t), k_t, cfg.rng_seed)
    for label, svd in (("event-user", svd_u), ("event-tag", svd_t)):
        if abs(svd.values[0] - 1.0) > 1e-8:
            logger.warning(
                "leading singular value of the normalized %s matrix is %.12f, "
                "expected 1", label, svd.values[0],
            )
    extras = {
        "svd_k_user": k_u,
        "svd_k_semantic": k_t,
        "sigma1_user": float(svd_u.values[0]),
        "sigma1_semantic": float(svd_t.values[0]),
    }
    return (
        latent_embedding(mat_u, svd_u, k_u),
        latent_embedding(mat_t, svd_t, k_t),
        extras,
    )


def similarity_matrices(
    dataset: Dataset, cfg: Config
) -> tuple[SimilarityMatrix, SimilarityMatrix, SimilarityMatrix, dict]:
    """S_u, S_t and their combination for the configured alpha."""
    emb_u, emb_t, extras = event_embeddings(dataset, cfg)
    su = cosine_similarity_matrix(emb_u, kind=KIND_USER)
    st = cosine_similarity_matrix(emb_t, kind=KIND_SEMANTIC)
    if cfg.min_shared >= 1:
        pairs = candidate_pairs(dataset, cfg.min_shared)
        su = restrict_to_candidates(su, pairs)
        st = restrict_to_candidates(st, pairs)
        logger.info("candidate selection kept %d event pairs", len(pairs))
    ssim = combine_similarities(su, st, cfg.alpha)
    return su, st, ssim, extras


class DetectionResult(NamedTuple):
    pruned: Dataset
    graph: UserGraph
    clusters: ClusterSet
    communities: CommunitySet
    st: SimilarityMatrix
    extras: dict


def detect_communities(dataset: Dataset, cfg: Config) -> DetectionResult:
    """Pruning through user assignment on an in-memory dataset."""
    pruned = prune_dataset(dataset, cfg)
    graph = user_user_projection(pruned)
    _su, st, ssim, extras = similarity_matrices(pruned, cfg)
    clusters = agglomerative_cluster(ssim, st, cfg)
    communities = assign_users(clusters, pruned, graph)
    return DetectionResult(pruned, graph, clusters, communities, st, extras)


def communities_payload(cs: CommunitySet, dataset: Dataset) -> dict:
    """JSON payload for ``communities.json``."""
    event_tags = dataset.event_tags()
    records = []
    for community in cs.communities:
        counts: Counter = Counter()
        for event in sorted(community.event_ids):
            for tag in event_tags.get(event, ()):
                counts[tag] += 1
        top_tags = [t for t, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:10]]
        records.append(
            {
                "community_id": community.id,
                "events": sorted(community.event_ids),
                "users": sorted(community.user_ids),
                "top_tags": top_tags,
                "size": len(community.user_ids),
            }
        )
    return {"dropped_empty": cs.dropped_empty, "communities": records}


def _write_json(payload, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _csv_row(report: MetricsReport, beta: float) -> dict:
    agg = report.aggregate
    params = report.parameters
    return {
        "alpha": params["alpha"],
        "beta": beta,
        "rng_seed": params["rng_seed"],
        "svd_k": params["svd_k"],
        "min_clusters": params["min_clusters"],
        "epsilon": params["epsilon"],
        "min_tag_freq": params["min_tag_freq"],
        "min_shared": params["min_shared"],
        "profile_theta": params["profile_theta"],
        "purity": agg["purity"],
        "f_purity": agg["f_purity"],
        "q": agg["q"],
        "purq": agg["purq"][f"{beta:g}"],
        "silhouette": agg["silhouette"],
        "friend_fraction": agg["friend_fraction"],
        "profile_fraction": agg["profile_fraction"],
        "n_communities": agg["n_communities"],
        "dropped_empty": agg["dropped_empty"],
        "mean_community_size": agg["mean_community_size"],
        "best_semq": agg["best_semq"],
    }


def _write_csv(rows: list[dict], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        writer.writerows(rows)


def run_detect(
    input_dir: str | Path,
    out_dir: str | Path,
    cfg: Config,
    betas: tuple[float, ...] = (0.5, 2.0),
    dump_embedding: str | None = None,
    dump_similarity: str | None = None,
    dump_trace: str | None = None,
) -> MetricsReport:
    """Full detection run: read TSV inputs, write ``communities.json``,
    ``report.json`` and a one-row ``report.csv`` into ``out_dir``."""
    input_dir = Path(input_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    dataset = load_dataset(input_dir)
    pruned = prune_dataset(dataset, cfg)
    topic_path = input_dir / TAG_TOPIC_FILE
    if not topic_path.exists():
        raise FileNotFoundError(f"missing required input file: {topic_path}")
    tm = load_topic_map(topic_path, known_tags=pruned.tags)

    graph = user_user_projection(pruned)
    su, st, ssim, extras = similarity_matrices(pruned, cfg)
    clusters = agglomerative_cluster(ssim, st, cfg)
    communities = assign_users(clusters, pruned, graph)

    parameters = {**asdict(cfg), "betas": list(betas), **extras}
    report = compute_report(
        communities, clusters, pruned, graph, tm, st, parameters, betas
    )

    _write_json(communities_payload(communities, pruned), out_dir / "communities.json")
    _write_json(report.to_dict(), out_dir / "report.json")
    _write_csv([_csv_row(report, beta) for beta in betas], out_dir / "report.csv")

    if dump_embedding:
        emb_u, emb_t, _ = event_embeddings(pruned, cfg)
        write_embedding_tsv(emb_u, f"{dump_embedding}_user.tsv")
        write_embedding_tsv(emb_t, f"{dump_embedding}_semantic.tsv")
    if dump_similarity:
        write_similarity_tsv(ssim, dump_similarity)
    if dump_trace:
        _write_json(trace_records(clusters), Path(dump_trace))

    logger.info(
        "detect: %d communities, purity=%.3f q=%.3f",
        len(communities.communities),
        report.aggregate["purity"],
        report.aggregate["q"],
    )
    return report


def run_sweep(
    input_dir: str | Path,
    out_dir: str | Path,
    cfg: Config,
    alphas: list[float],
    betas: list[float],
) -> list[dict]:
    """One detection run per alpha, one CSV row per (alpha, beta)."""
    if not alphas or not betas:
        raise ValueError("sweep needs at least one alpha and one beta")
    input_dir = Path(input_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    dataset = load_dataset(input_dir)
    topic_path = input_dir / TAG_TOPIC_FILE
    if not topic_path.exists():
        raise FileNotFoundError(f"missing required input file: {topic_path}")

    rows = []
    for alpha in alphas:
        run_cfg = replace(cfg, alpha=alpha)
        pruned = prune_dataset(dataset, run_cfg)
        tm = load_topic_map(topic_path, known_tags=pruned.tags)
        graph = user_user_projection(pruned)
        _su, st, ssim, extras = similarity_matrices(pruned, run_cfg)
        clusters = agglomerative_cluster(ssim, st, run_cfg)
        communities = assign_users(clusters, pruned, graph)
        parameters = {**asdict(run_cfg), "betas": list(betas), **extras}
        report = compute_report(
            communities, clusters, pruned, graph, tm, st, parameters, tuple(betas)
        )
        for beta in betas:
            rows.append(_csv_row(report, beta))
        logger.info(
            "sweep alpha=%.2f: purity=%.3f q=%.3f",
            alpha, report.aggregate["purity"], report.aggregate["q"],
        )

    _write_csv(rows, out_dir / "report.csv")
    return rows


def run_compare(
    input_dir: str | Path,
    out_dir: str | Path,
    cfg: Config,
    betas: tuple[float, ...] = (0.5, 2.0),
) -> dict:
    """Run the topical method and the greedy-modularity baseline side by
    side; emits both community files and a comparison summary."""
    input_dir = Path(input_dir)
    out_dir = Path(out_dir)
    report = run_detect(input_dir, out_dir, cfg, betas)

    dataset = prune_dataset(load_dataset(input_dir), cfg)
    graph = user_user_projection(dataset)
    baseline_cs = greedy_modularity(graph)
    _write_json(
        communities_payload(baseline_cs, dataset), out_dir / "baseline_communities.json"
    )

    baseline_summary = {
        "q": newman_q(baseline_cs, graph),
        "n_communities": len(baseline_cs.communities),
        "mean_community_size": (
            sum(len(c.user_ids) for c in baseline_cs.communities)
            / len(baseline_cs.communities)
        ),
        "mean_conductance": (
            sum(conductance(c.user_ids, graph) for c in baseline_cs.communities)
            / len(baseline_cs.communities)
        ),
        "friend_fraction": friend_fraction(baseline_cs, dataset.friend_edges),
        "profile_fraction": profile_similarity_fraction(
            baseline_cs, dataset.user_profiles, cfg.profile_theta
        ),
    }
    comparison = {
        "topical": report.aggregate,
        "baseline": baseline_summary,
    }
    _write_json(comparison, out_dir / "comparison.json")
    return comparison


def rescore_communities(
    input_dir: str | Path,
    communities_path: str | Path,
    out_dir: str | Path,
    cfg: Config,
    betas: tuple[float, ...] = (0.5, 2.0),
) -> MetricsReport:
    """Recompute the metric suite for a stored ``communities.json``.

    Assignment scores are not part of the file format, so the disjoint
    projection inside Q treats every membership equally; silhouette needs
    the merge trace and is omitted.
    """
    input_dir = Path(input_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    dataset = prune_dataset(load_dataset(input_dir), cfg)
    topic_path = input_dir / TAG_TOPIC_FILE
    if not topic_path.exists():
        raise FileNotFoundError(f"missing required input file: {topic_path}")
    tm = load_topic_map(topic_path, known_tags=dataset.tags)
    graph = user_user_projection(dataset)

    with open(communities_path, encoding="utf-8") as fh:
        payload = json.load(fh)
    communities = tuple(
        Community(
            id=int(rec["community_id"]),
            event_ids=frozenset(rec.get("events", [])),
            user_ids=frozenset(rec["users"]),
            scores={},
        )
        for rec in payload["communities"]
    )
    cs = CommunitySet(
        communities=communities, dropped_empty=int(payload.get("dropped_empty", 0))
    )

    parameters = {**asdict(cfg), "betas": list(betas), "source": str(communities_path)}
    report = compute_report(cs, None, dataset, graph, tm, None, parameters, betas)
    _write_json(report.to_dict(), out_dir / "report.json")
    _write_csv([_csv_row(report, beta) for beta in betas], out_dir / "report.csv")
    return report
