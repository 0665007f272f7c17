"""User assignment: turn event clusters into overlapping user communities."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .clustering import ClusterSet
from .graph import Dataset, UserGraph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Community:
    id: int
    event_ids: frozenset[str]
    user_ids: frozenset[str]
    scores: dict[str, float]


@dataclass(frozen=True)
class CommunitySet:
    """Overlapping communities; ``dropped_empty`` counts clusters whose
    candidate users all fell below their retention threshold."""

    communities: tuple[Community, ...]
    dropped_empty: int

    def __post_init__(self) -> None:
        for c in self.communities:
            if not c.user_ids:
                raise ValueError(f"community {c.id} retained no users")
            for u, score in c.scores.items():
                if not 0.0 <= score <= 1.0:
                    raise ValueError(f"assignment score {score} for {u!r} out of [0, 1]")


def assignment_score(
    user: str, community_users: frozenset[str] | set[str], graph: UserGraph
) -> float:
    """Fraction of the user's neighbors who participate in the community.

    A user with no neighbors at all carries no link evidence and scores 1.
    """
    if user not in community_users:
        raise ValueError(f"user {user!r} is not a participant of the community")
    degree = graph.degree.get(user, 0)
    if degree == 0:
        return 1.0
    inside = len(graph.neighbors[user] & community_users)
    return inside / degree


def assign_users(
    clusters: ClusterSet, dataset: Dataset, graph: UserGraph
) -> CommunitySet:
    """Attach users to event clusters by assignment score.

    Every user is scored against each cluster containing at least one of
    their events; memberships with a score at or above the mean of the
    user's non-zero scores are retained. Clusters that end up with no
    users are dropped and counted.
    """
    event_users = dataset.event_users()
    cluster_participants: list[set[str]] = []
    for cluster in clusters.clusters:
        members: set[str] = set()
        for event in cluster:
            members |= event_users.get(event, set())
        cluster_participants.append(members)

    retained: list[dict[str, float]] = [{} for _ in clusters.clusters]
    user_events = dataset.user_events()
    cluster_of_event = {
        event: idx for idx, cluster in enumerate(clusters.clusters) for event in cluster
    }
    for user in sorted(dataset.users):
        candidates = sorted({cluster_of_event[e] for e in user_events[user]})
        if not candidates:
            continue
        scores = {
            idx: assignment_score(user, cluster_participants[idx], graph)
            for idx in candidates
        }
        nonzero = [s for s in scores.values() if s > 0.0]
        if nonzero:
            threshold = sum(nonzero) / len(nonzero)
            for idx, score in scores.items():
                if score > 0.0 and score >= threshold:
                    retained[idx][user] = score
        else:
            # no link evidence anywhere: keep every candidate membership
            for idx, score in scores.items():
                retained[idx][user] = 1.0

    communities = []
    dropped = 0
    next_id = 0
    for idx, cluster in enumerate(clusters.clusters):
        members = retained[idx]
        if not members:
            dropped += 1
            continue
        communities.append(
            Community(
                id=next_id,
                event_ids=cluster,
                user_ids=frozenset(members),
                scores=dict(sorted(members.items())),
            )
        )
        next_id += 1
    if dropped:
        logger.info("dropped %d empty clusters during user assignment", dropped)
    return CommunitySet(communities=tuple(communities), dropped_empty=dropped)
