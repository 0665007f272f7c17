"""Event-based social network model: dataset loading, pruning and the
user-user co-participation projection."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)

EVENT_USER_FILE = "event_user.tsv"
EVENT_TAG_FILE = "event_tag.tsv"
TAG_TOPIC_FILE = "tag_topic.tsv"
FRIENDS_FILE = "friends.tsv"
USER_TAGS_FILE = "user_tags.tsv"


class EmptyDatasetError(RuntimeError):
    """Raised when pruning (or loading) leaves no usable events."""


@dataclass(frozen=True)
class Config:
    """Parameters of the detection pipeline.

    alpha weights the user-latent similarity against the semantic one,
    beta weights purity against modularity in the combined score,
    min_clusters is the floor of the agglomerative merge loop (the number
    of topics when it is known), and epsilon is the minimum SemQ gain
    considered a significant improvement.
    """

    alpha: float = 0.3
    beta: float = 0.5
    min_clusters: int = 2
    epsilon: float = 1e-4
    svd_k: int = 10
    min_tag_freq: int = 0
    min_shared: int = 0
    profile_theta: float = 0.3
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.beta <= 0.0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if self.min_clusters < 1:
            raise ValueError(f"min_clusters must be >= 1, got {self.min_clusters}")
        if self.epsilon < 0.0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.svd_k < 1:
            raise ValueError(f"svd_k must be >= 1, got {self.svd_k}")
        if self.min_tag_freq < 0:
            raise ValueError(f"min_tag_freq must be >= 0, got {self.min_tag_freq}")
        if self.min_shared < 0:
            raise ValueError(f"min_shared must be >= 0, got {self.min_shared}")
        if not 0.0 <= self.profile_theta <= 1.0:
            raise ValueError(f"profile_theta must be in [0, 1], got {self.profile_theta}")


@dataclass(frozen=True)
class Dataset:
    """An event-based social network as flat edge sets.

    ``event_user_edges`` and ``event_tag_edges`` carry the bipartite
    structure; ``friend_edges`` (unordered user pairs) and
    ``user_profiles`` (tag multisets) are optional side information.
    """

    users: frozenset[str]
    events: frozenset[str]
    tags: frozenset[str]
    event_user_edges: frozenset[tuple[str, str]]
    event_tag_edges: frozenset[tuple[str, str]]
    friend_edges: frozenset[tuple[str, str]] = frozenset()
    user_profiles: dict[str, Counter] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for event, user in self.event_user_edges:
            if event not in self.events or user not in self.users:
                raise ValueError(f"dangling event-user edge ({event}, {user})")
        for event, tag in self.event_tag_edges:
            if event not in self.events or tag not in self.tags:
                raise ValueError(f"dangling event-tag edge ({event}, {tag})")
        for u, v in self.friend_edges:
            if u not in self.users or v not in self.users:
                raise ValueError(f"dangling friend edge ({u}, {v})")
            if u >= v:
                raise ValueError(f"friend edge ({u}, {v}) not stored as ordered pair")

    def event_users(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = {e: set() for e in self.events}
        for event, user in self.event_user_edges:
            out[event].add(user)
        return out

    def event_tags(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = {e: set() for e in self.events}
        for event, tag in self.event_tag_edges:
            out[event].add(tag)
        return out

    def user_events(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = {u: set() for u in self.users}
        for event, user in self.event_user_edges:
            out[user].add(event)
        return out


@dataclass(frozen=True)
class UserGraph:
    """Undirected user-user graph weighted by co-participation counts."""

    nodes: tuple[str, ...]
    weighted_edges: dict[tuple[str, str], int]
    degree: dict[str, int]
    neighbors: dict[str, frozenset[str]] = field(repr=False)

    def n_edges(self) -> int:
        return len(self.weighted_edges)

    @cached_property
    def node_index(self) -> dict[str, int]:
        return {u: i for i, u in enumerate(self.nodes)}

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge endpoints as positional index arrays, in sorted edge order."""
        index = self.node_index
        edges = sorted(self.weighted_edges)
        u_idx = np.fromiter((index[u] for u, _ in edges), dtype=np.int64, count=len(edges))
        v_idx = np.fromiter((index[v] for _, v in edges), dtype=np.int64, count=len(edges))
        return u_idx, v_idx

    def density(self) -> float:
        n = len(self.nodes)
        if n < 2:
            return 0.0
        return 2.0 * len(self.weighted_edges) / (n * (n - 1))

    def mean_clustering(self) -> float:
        """Average local clustering coefficient (unweighted)."""
        n = len(self.nodes)
        if n == 0:
            return 0.0
        if n > 8000:
            # dense n x n counting would need too much memory; fall back
            # to per-node set intersections
            total = 0.0
            for u in self.nodes:
                nbrs = self.neighbors[u]
                d = len(nbrs)
                if d < 2:
                    continue
                links = sum(len(self.neighbors[v] & nbrs) for v in nbrs)
                total += links / (d * (d - 1))
            return total / n

        index = {u: i for i, u in enumerate(self.nodes)}
        adj = np.zeros((n, n), dtype=np.float32)
        for u, v in self.weighted_edges:
            i, j = index[u], index[v]
            adj[i, j] = 1.0
            adj[j, i] = 1.0
        # closed two-paths through each node, counted via common neighbors
        common = adj @ adj
        links = (adj * common).sum(axis=1, dtype=np.float64)
        deg = adj.sum(axis=1, dtype=np.float64)
        denom = deg * (deg - 1.0)
        mask = denom > 0
        return float((links[mask] / denom[mask]).sum() / n)


def _normalize_tag(raw: str) -> str:
    return raw.strip().casefold()


def _read_tsv(path: Path, n_cols: int) -> list[tuple[str, ...]]:
    """Read a fixed-width TSV, skipping blank and ``#`` comment lines."""
    rows: list[tuple[str, ...]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip("\n")
            if not stripped.strip() or stripped.lstrip().startswith("#"):
                continue
            parts = stripped.split("\t")
            if len(parts) != n_cols:
                raise ValueError(
                    f"{path}:{lineno}: expected {n_cols} tab-separated fields, "
                    f"got {len(parts)}"
                )
            fields = tuple(p.strip() for p in parts)
            if any(not p for p in fields):
                raise ValueError(f"{path}:{lineno}: empty field")
            rows.append(fields)
    return rows


def load_dataset(input_dir: str | Path) -> Dataset:
    """Load a dataset from the TSV files in ``input_dir``.

    ``event_user.tsv`` and ``event_tag.tsv`` are required; ``friends.tsv``
    and ``user_tags.tsv`` are optional. Duplicate lines collapse into a
    single edge. Tags are whitespace-trimmed and case-folded.
    """
    input_dir = Path(input_dir)
    eu_path = input_dir / EVENT_USER_FILE
    et_path = input_dir / EVENT_TAG_FILE
    for required in (eu_path, et_path):
        if not required.exists():
            raise FileNotFoundError(f"missing required input file: {required}")

    event_user = frozenset((e, u) for e, u in _read_tsv(eu_path, 2))
    event_tag = frozenset((e, _normalize_tag(t)) for e, t in _read_tsv(et_path, 2))

    users = {u for _, u in event_user}
    events = {e for e, _ in event_user} | {e for e, _ in event_tag}
    tags = {t for _, t in event_tag}

    friend_edges: set[tuple[str, str]] = set()
    fr_path = input_dir / FRIENDS_FILE
    if fr_path.exists():
        for u, v in _read_tsv(fr_path, 2):
            if u == v:
                continue
            a, b = (u, v) if u < v else (v, u)
            friend_edges.add((a, b))
            users.add(a)
            users.add(b)

    user_profiles: dict[str, Counter] = {}
    ut_path = input_dir / USER_TAGS_FILE
    if ut_path.exists():
        for u, t in _read_tsv(ut_path, 2):
            user_profiles.setdefault(u, Counter())[_normalize_tag(t)] += 1
            users.add(u)

    logger.info(
        "loaded dataset from %s: %d users, %d events, %d tags, %d participation edges",
        input_dir, len(users), len(events), len(tags), len(event_user),
    )
    return Dataset(
        users=frozenset(users),
        events=frozenset(events),
        tags=frozenset(tags),
        event_user_edges=event_user,
        event_tag_edges=event_tag,
        friend_edges=frozenset(friend_edges),
        user_profiles=user_profiles,
    )


def prune_dataset(dataset: Dataset, cfg: Config) -> Dataset:
    """Apply the dataset cleaning rules, iterated to a fixpoint.

    Rules: drop tags occurring in fewer than ``cfg.min_tag_freq`` events,
    drop events left without tags or without users, drop event-user pairs
    where the event has a single participant who attends only that event,
    and drop ids that no longer touch any edge. Removing one item can
    create new violations, hence the fixpoint loop.
    """
    eu = set(dataset.event_user_edges)
    et = set(dataset.event_tag_edges)

    while True:
        changed = False

        tag_freq = Counter(t for _, t in et)
        bad_tags = {t for t, c in tag_freq.items() if c < cfg.min_tag_freq}
        if bad_tags:
            et = {(e, t) for e, t in et if t not in bad_tags}
            changed = True

        events_with_tags = {e for e, _ in et}
        events_with_users = {e for e, _ in eu}
        alive = events_with_tags & events_with_users
        if alive != events_with_tags | events_with_users:
            eu = {(e, u) for e, u in eu if e in alive}
            et = {(e, t) for e, t in et if e in alive}
            changed = True

        event_size = Counter(e for e, _ in eu)
        user_count = Counter(u for _, u in eu)
        singleton = {
            (e, u)
            for e, u in eu
            if event_size[e] == 1 and user_count[u] == 1
        }
        if singleton:
            eu -= singleton
            changed = True

        if not changed:
            break

    if not eu:
        raise EmptyDatasetError(
            "pruning removed every event-user pair; relax min_tag_freq or check the input"
        )

    users = {u for _, u in eu}
    events = {e for e, _ in eu}
    tags = {t for _, t in et}
    friends = {(u, v) for u, v in dataset.friend_edges if u in users and v in users}
    profiles = {
        u: Counter(profile) for u, profile in dataset.user_profiles.items() if u in users
    }

    removed_events = len(dataset.events) - len(events)
    removed_users = len(dataset.users) - len(users)
    if removed_events or removed_users:
        logger.info(
            "pruning removed %d events, %d users, %d tags",
            removed_events, removed_users, len(dataset.tags) - len(tags),
        )
    return Dataset(
        users=frozenset(users),
        events=frozenset(events),
        tags=frozenset(tags),
        event_user_edges=frozenset(eu),
        event_tag_edges=frozenset(et),
        friend_edges=frozenset(friends),
        user_profiles=profiles,
    )


def user_user_projection(dataset: Dataset) -> UserGraph:
    """Project the event-user bipartite graph onto users.

    Edge weight is the number of events both endpoints attend; the degree
    map counts distinct neighbors, not summed weights. Computed as the
    sparse co-occurrence product of the incidence matrix.
    """
    if not dataset.events:
        raise ValueError("cannot project an empty dataset")

    nodes = tuple(sorted(dataset.users))
    events = sorted(dataset.events)
    uindex = {u: i for i, u in enumerate(nodes)}
    eindex = {e: i for i, e in enumerate(events)}
    rows = np.empty(len(dataset.event_user_edges), dtype=np.int64)
    cols = np.empty(len(dataset.event_user_edges), dtype=np.int64)
    for pos, (e, u) in enumerate(dataset.event_user_edges):
        rows[pos] = eindex[e]
        cols[pos] = uindex[u]
    incidence = sp.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(len(events), len(nodes))
    )

    co = (incidence.T @ incidence).tocsr()
    co.setdiag(0)
    co.eliminate_zeros()

    weights: dict[tuple[str, str], int] = {}
    coo = co.tocoo()
    for i, j, w in zip(coo.row, coo.col, coo.data):
        if i < j:
            weights[(nodes[i], nodes[j])] = int(w)

    neighbors = {
        nodes[i]: frozenset(nodes[j] for j in co.indices[co.indptr[i]:co.indptr[i + 1]])
        for i in range(len(nodes))
    }
    degree = {u: len(neighbors[u]) for u in nodes}
    return UserGraph(
        nodes=nodes,
        weighted_edges=weights,
        degree=degree,
        neighbors=neighbors,
    )
