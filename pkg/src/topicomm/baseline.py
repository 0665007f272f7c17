"""Greedy modularity maximization over the user graph, used as the
link-only comparison method."""

from __future__ import annotations

import numpy as np

from . import _kernels
from .graph import UserGraph
from .membership import Community, CommunitySet


def greedy_modularity(graph: UserGraph) -> CommunitySet:
    """Merge singleton user communities by the largest modularity gain
    until no merge improves modularity.

    Returns a disjoint partition of the users; the communities carry no
    events. Nodes that never co-participate stay in their own singleton
    community, since merging disconnected communities can only lower
    modularity.
    """
    if graph.n_edges() == 0:
        raise ValueError("greedy modularity needs a graph with at least one edge")

    nodes = graph.nodes
    index = {u: i for i, u in enumerate(nodes)}
    edge_i = np.fromiter(
        (index[u] for u, _ in graph.weighted_edges), dtype=np.int64
    )
    edge_j = np.fromiter(
        (index[v] for _, v in graph.weighted_edges), dtype=np.int64
    )

    a_idx, b_idx, _gains = _kernels.modularity_merge_loop(edge_i, edge_j, len(nodes))

    labels = np.arange(len(nodes))
    for a, b in zip(a_idx, b_idx):
        labels[labels == b] = a

    groups: dict[int, list[str]] = {}
    for pos, label in enumerate(labels):
        groups.setdefault(int(label), []).append(nodes[pos])

    communities = tuple(
        Community(
            id=cid,
            event_ids=frozenset(),
            user_ids=frozenset(groups[key]),
            scores={},
        )
        for cid, key in enumerate(sorted(groups))
    )
    return CommunitySet(communities=communities, dropped_empty=0)
