"""Evaluation metrics: purity, modularity, their combination, and the
link/content quality measures reported for each detection run."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .clustering import ClusterSet
from .graph import Dataset, UserGraph, _normalize_tag, _read_tsv
from .membership import CommunitySet
from .similarity import SimilarityMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TopicMap:
    tag_topic: dict[str, str]

    def get(self, tag: str) -> str | None:
        return self.tag_topic.get(tag)


def load_topic_map(path: str | Path, known_tags: frozenset[str] | None = None) -> TopicMap:
    """Read ``tag<TAB>topic_id`` rows; tags unknown to the dataset are kept
    but reported, since they usually indicate pruning or typos."""
    mapping: dict[str, str] = {}
    unknown = 0
    for tag, topic in _read_tsv(Path(path), 2):
        tag = _normalize_tag(tag)
        if known_tags is not None and tag not in known_tags:
            unknown += 1
        mapping[tag] = topic
    if unknown:
        logger.warning("%s: %d mapped tags do not occur in the dataset", path, unknown)
    return TopicMap(tag_topic=mapping)


def purity(
    cs: CommunitySet, tm: TopicMap, dataset: Dataset
) -> tuple[dict[int, float], float]:
    """Per-community topical purity and their unweighted mean.

    A community's tag occurrences are counted once per event; the purity
    is the share of the dominant topic. Tags without a topic mapping, and
    communities with no mapped occurrence at all, are excluded.
    """
    event_tags = dataset.event_tags()
    per: dict[int, float] = {}
    unmapped_tags = 0
    for community in cs.communities:
        counts: Counter = Counter()
        for event in sorted(community.event_ids):
            for tag in event_tags.get(event, ()):
                topic = tm.get(tag)
                if topic is None:
                    unmapped_tags += 1
                else:
                    counts[topic] += 1
        if not counts:
            logger.warning(
                "community %d has no topic-mapped tags; excluded from purity",
                community.id,
            )
            continue
        per[community.id] = max(counts.values()) / sum(counts.values())
    if unmapped_tags:
        logger.warning("%d tag occurrences had no topic mapping", unmapped_tags)
    if not per:
        raise ValueError("no community has topic-mapped tags; purity undefined")
    return per, sum(per.values()) / len(per)


def f_purity(per_community: dict[int, float] | list[float]) -> float:
    """Fraction of communities whose purity reaches the mean purity."""
    values = list(per_community.values()) if isinstance(per_community, dict) else list(per_community)
    if not values:
        raise ValueError("f_purity needs at least one community purity")
    mean = sum(values) / len(values)
    return sum(1 for v in values if v >= mean) / len(values)


def project_disjoint(cs: CommunitySet) -> dict[str, int]:
    """Collapse overlapping memberships: each user goes to the community
    where their assignment score is highest (ties to the lowest id)."""
    best: dict[str, tuple[float, int]] = {}
    for community in cs.communities:
        for user in community.user_ids:
            score = community.scores.get(user, 1.0)
            current = best.get(user)
            if current is None or score > current[0]:
                best[user] = (score, community.id)
    return {user: cid for user, (_, cid) in best.items()}


def newman_q(cs: CommunitySet, graph: UserGraph) -> float:
    """Newman modularity of the disjoint projection of ``cs`` over the
    unweighted edges of the user graph."""
    m = graph.n_edges()
    if m == 0:
        raise ValueError("modularity undefined on a graph with no edges")
    labels = project_disjoint(cs)
    next_free = max((c.id for c in cs.communities), default=-1) + 1
    for node in graph.nodes:
        if node not in labels:
            labels[node] = next_free
            next_free += 1

    label_arr = np.fromiter(
        (labels[u] for u in graph.nodes), dtype=np.int64, count=len(graph.nodes)
    )
    _, label_arr = np.unique(label_arr, return_inverse=True)
    u_idx, v_idx = graph.edge_arrays
    cu, cv = label_arr[u_idx], label_arr[v_idx]
    n_comms = int(label_arr.max()) + 1
    inside = np.bincount(cu[cu == cv], minlength=n_comms)
    ends = np.bincount(cu, minlength=n_comms) + np.bincount(cv, minlength=n_comms)
    terms = inside / m - (ends / (2.0 * m)) ** 2
    return float(terms.sum())


def purq_beta(purity_value: float, q: float, beta: float) -> float:
    """F-style weighted combination of purity and modularity. ``beta`` < 1
    emphasizes purity, ``beta`` > 1 emphasizes modularity."""
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    if purity_value < 0:
        raise ValueError(f"purity must be >= 0, got {purity_value}")
    if q < 0:
        logger.warning("negative modularity %.4f clamped to 0 in PurQ", q)
        q = 0.0
    denom = beta * beta * purity_value + q
    if denom == 0.0:
        return 0.0
    return (1.0 + beta * beta) * (purity_value * q) / denom


def conductance(community_users, graph: UserGraph) -> float:
    """Cut edges over the smaller side volume, on unweighted edges."""
    members = set(community_users)
    mask = np.zeros(len(graph.nodes), dtype=bool)
    index = graph.node_index
    for u in members:
        if u in index:
            mask[index[u]] = True
    u_idx, v_idx = graph.edge_arrays
    cut = int(np.count_nonzero(mask[u_idx] != mask[v_idx]))
    vol_in = sum(graph.degree.get(u, 0) for u in members)
    vol_total = 2 * graph.n_edges()
    denom = min(vol_in, vol_total - vol_in)
    if cut == 0 or denom == 0:
        return 0.0
    return cut / denom


def silhouette(clusters: ClusterSet, st: SimilarityMatrix) -> float:
    """Mean silhouette of the event partition under the semantic distance
    ``max(0, 1 - similarity)``. Events in singleton clusters score 0."""
    if len(clusters.clusters) < 2:
        raise ValueError("silhouette undefined for a single cluster")
    index = {item: i for i, item in enumerate(st.items)}
    groups = [
        np.asarray(sorted(index[e] for e in cluster), dtype=np.intp)
        for cluster in clusters.clusters
    ]
    dist = np.clip(1.0 - st.values, 0.0, None)

    scores = []
    for gi, own in enumerate(groups):
        for i in own:
            if len(own) == 1:
                scores.append(0.0)
                continue
            a = (dist[i, own].sum() - dist[i, i]) / (len(own) - 1)
            b = min(
                dist[i, other].mean()
                for gj, other in enumerate(groups)
                if gj != gi
            )
            top = max(a, b)
            scores.append(0.0 if top == 0.0 else (b - a) / top)
    return float(np.mean(scores))


def friend_fraction(
    cs: CommunitySet, friend_edges: frozenset[tuple[str, str]], global_mode: bool = False
) -> float | None:
    """Share of members' friendship edges that stay inside the community.

    Averages over communities with at least one incident friend edge; in
    ``global_mode`` the internal and incident counts are pooled across
    communities instead. Returns None when there is no friendship data.
    """
    if not friend_edges:
        return None
    edges = sorted(friend_edges)
    people = sorted({u for pair in edges for u in pair})
    index = {u: i for i, u in enumerate(people)}
    u_idx = np.fromiter((index[u] for u, _ in edges), dtype=np.int64, count=len(edges))
    v_idx = np.fromiter((index[v] for _, v in edges), dtype=np.int64, count=len(edges))

    fractions = []
    total_internal = 0
    total_incident = 0
    for community in cs.communities:
        mask = np.zeros(len(people), dtype=bool)
        for u in community.user_ids:
            if u in index:
                mask[index[u]] = True
        in_u, in_v = mask[u_idx], mask[v_idx]
        incident = int(np.count_nonzero(in_u | in_v))
        internal = int(np.count_nonzero(in_u & in_v))
        if incident:
            fractions.append(internal / incident)
            total_internal += internal
            total_incident += incident
    if global_mode:
        return total_internal / total_incident if total_incident else None
    return sum(fractions) / len(fractions) if fractions else None


def profile_similarity_fraction(
    cs: CommunitySet, profiles: dict[str, Counter], theta: float
) -> float | None:
    """Share of member pairs whose tag profiles have cosine at least
    ``theta``, averaged over communities with two or more profiled members."""
    if not profiles:
        return None
    vocab = sorted({t for profile in profiles.values() for t in profile})
    tag_index = {t: j for j, t in enumerate(vocab)}
    fractions = []
    for community in cs.communities:
        profiled = sorted(u for u in community.user_ids if u in profiles)
        if len(profiled) < 2:
            continue
        mat = np.zeros((len(profiled), len(vocab)))
        for i, u in enumerate(profiled):
            for t, c in sorted(profiles[u].items()):
                mat[i, tag_index[t]] = c
        norms = np.linalg.norm(mat, axis=1)
        norms[norms == 0.0] = 1.0
        cosines = (mat / norms[:, None]) @ (mat / norms[:, None]).T
        iu = np.triu_indices(len(profiled), k=1)
        fractions.append(float(np.count_nonzero(cosines[iu] >= theta) / len(iu[0])))
    return sum(fractions) / len(fractions) if fractions else None


def overlap_degrees(cs: CommunitySet) -> list[tuple[int, int, float]]:
    """Weighted community-community overlap edges: shared users over the
    size of the smaller community, for pairs sharing at least one user."""
    out = []
    comms = cs.communities
    for i, a in enumerate(comms):
        for b in comms[i + 1:]:
            shared = len(a.user_ids & b.user_ids)
            if shared:
                weight = shared / min(len(a.user_ids), len(b.user_ids))
                out.append((a.id, b.id, weight))
    return out


@dataclass
class MetricsReport:
    per_community: list[dict]
    aggregate: dict
    parameters: dict
    graph: dict = field(default_factory=dict)
    overlap: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "parameters": self.parameters,
            "graph": self.graph,
            "aggregate": self.aggregate,
            "per_community": self.per_community,
            "overlap": self.overlap,
        }


def compute_report(
    cs: CommunitySet,
    clusters: ClusterSet | None,
    dataset: Dataset,
    graph: UserGraph,
    tm: TopicMap,
    st: SimilarityMatrix | None,
    parameters: dict,
    betas: tuple[float, ...] = (0.5, 2.0),
) -> MetricsReport:
    """Assemble the full evaluation report for one detection run.

    ``clusters`` and ``st`` may be None when re-scoring a stored community
    file; the silhouette and merge-trace fields are then omitted.
    """
    per_purity, mean_purity = purity(cs, tm, dataset)
    q = newman_q(cs, graph)
    purq = {f"{beta:g}": purq_beta(mean_purity, q, beta) for beta in betas}
    sil = None
    if clusters is not None and st is not None and len(clusters.clusters) >= 2:
        sil = silhouette(clusters, st)

    per_community = []
    for community in cs.communities:
        per_community.append(
            {
                "id": community.id,
                "size": len(community.user_ids),
                "n_events": len(community.event_ids),
                "purity": per_purity.get(community.id),
                "conductance": conductance(community.user_ids, graph),
            }
        )

    aggregate = {
        "purity": mean_purity,
        "f_purity": f_purity(per_purity),
        "q": q,
        "purq": purq,
        "silhouette": sil,
        "friend_fraction": friend_fraction(cs, dataset.friend_edges),
        "profile_fraction": profile_similarity_fraction(
            cs, dataset.user_profiles, parameters.get("profile_theta", 0.3)
        ),
        "n_communities": len(cs.communities),
        "dropped_empty": cs.dropped_empty,
        "mean_community_size": (
            sum(len(c.user_ids) for c in cs.communities) / len(cs.communities)
            if cs.communities
            else 0.0
        ),
        "best_semq": clusters.best_semq if clusters is not None else None,
        "semq_initial": clusters.semq_initial if clusters is not None else None,
    }
    graph_stats = {
        "n_users": len(graph.nodes),
        "n_edges": graph.n_edges(),
        "density": graph.density(),
        "mean_clustering": graph.mean_clustering(),
    }
    overlap = [
        {"a": a, "b": b, "weight": w} for a, b, w in overlap_degrees(cs)
    ]
    return MetricsReport(
        per_community=per_community,
        aggregate=aggregate,
        parameters=parameters,
        graph=graph_stats,
        overlap=overlap,
    )
