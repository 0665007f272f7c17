"""Seeded generator for synthetic event-based social networks with
planted topical communities, used as the ground-truth oracle."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Dataset

PARTICIPATION_MODES = ("uniform", "power")


@dataclass(frozen=True)
class PlantedSpec:
    """Parameters of a planted-community network.

    Every topic owns a block of users, events and tags. An event draws
    its participants from its topic's users with ``p_in`` and from all
    other users with ``p_out``. With probability ``tag_noise`` an event's
    tags are drawn from a foreign topic's vocabulary instead of its own,
    so each tag draw is foreign with exactly that probability. The power
    participation mode rescales per-user attendance by heavy-tailed
    weights.
    """

    n_topics: int = 4
    events_per_topic: int = 10
    users_per_topic: int = 50
    tags_per_topic: int = 8
    p_in: float = 0.3
    p_out: float = 0.01
    tag_noise: float = 0.05
    rng_seed: int = 7
    tags_per_event: int = 4
    participation: str = "uniform"
    power_exponent: float = 2.5
    friend_prob: float = 0.3

    def __post_init__(self) -> None:
        if min(self.n_topics, self.events_per_topic, self.users_per_topic,
               self.tags_per_topic, self.tags_per_event) < 1:
            raise ValueError("all planted block sizes must be >= 1")
        if not 0.0 <= self.p_out < self.p_in <= 1.0:
            raise ValueError(
                f"need 0 <= p_out < p_in <= 1, got p_in={self.p_in}, p_out={self.p_out}"
            )
        if not 0.0 <= self.tag_noise < 1.0:
            raise ValueError(f"tag_noise must be in [0, 1), got {self.tag_noise}")
        if self.participation not in PARTICIPATION_MODES:
            raise ValueError(f"participation must be one of {PARTICIPATION_MODES}")
        if self.power_exponent <= 1.0:
            raise ValueError("power_exponent must be > 1 for a finite mean")
        if not 0.0 <= self.friend_prob <= 1.0:
            raise ValueError(f"friend_prob must be in [0, 1], got {self.friend_prob}")


@dataclass(frozen=True)
class PlantedTruth:
    event_topic: dict[str, str]
    user_topic: dict[str, str]
    tag_topic: dict[str, str]


def generate_planted_esbn(spec: PlantedSpec) -> tuple[Dataset, PlantedTruth]:
    """Generate a dataset with planted communities; deterministic for a
    fixed seed (PCG64 generator)."""
    rng = np.random.default_rng(spec.rng_seed)
    n_topics = spec.n_topics
    n_events = n_topics * spec.events_per_topic
    n_users = n_topics * spec.users_per_topic
    topic_ids = [f"topic{z:02d}" for z in range(n_topics)]

    users = [f"u{i:04d}" for i in range(n_users)]
    events = [f"e{i:04d}" for i in range(n_events)]
    user_topic_idx = np.repeat(np.arange(n_topics), spec.users_per_topic)
    event_topic_idx = np.repeat(np.arange(n_topics), spec.events_per_topic)
    tags = [
        f"tag{z:02d}_{j:02d}"
        for z in range(n_topics)
        for j in range(spec.tags_per_topic)
    ]
    tag_pool = np.arange(n_topics * spec.tags_per_topic).reshape(
        n_topics, spec.tags_per_topic
    )

    if spec.participation == "power":
        weights = 1.0 + rng.pareto(spec.power_exponent, size=n_users)
        weights /= weights.mean()
    else:
        weights = np.ones(n_users)

    event_user_edges: set[tuple[str, str]] = set()
    attendance = np.zeros((n_events, n_users), dtype=bool)
    for e in range(n_events):
        base = np.where(user_topic_idx == event_topic_idx[e], spec.p_in, spec.p_out)
        probs = np.minimum(base * weights, 1.0)
        mask = rng.random(n_users) < probs
        if not mask.any():
            own = np.where(user_topic_idx == event_topic_idx[e])[0]
            mask[rng.choice(own)] = True
        attendance[e] = mask
        for u in np.where(mask)[0]:
            event_user_edges.add((events[e], users[u]))

    tag_source = event_topic_idx.copy()
    for e in range(n_events):
        if spec.tag_noise > 0.0 and rng.random() < spec.tag_noise:
            shift = int(rng.integers(1, n_topics)) if n_topics > 1 else 0
            tag_source[e] = (event_topic_idx[e] + shift) % n_topics

    event_tag_edges: set[tuple[str, str]] = set()
    n_draws = min(spec.tags_per_event, spec.tags_per_topic)
    for e in range(n_events):
        chosen = rng.choice(tag_pool[tag_source[e]], size=n_draws, replace=False)
        for t in chosen:
            event_tag_edges.add((events[e], tags[int(t)]))

    active_users = sorted({u for _, u in event_user_edges})
    active_events = sorted({e for e, _ in event_user_edges})

    co_pairs: set[tuple[str, str]] = set()
    for e in range(n_events):
        members = [users[u] for u in np.where(attendance[e])[0]]
        for i, u in enumerate(members):
            for v in members[i + 1:]:
                co_pairs.add((u, v) if u < v else (v, u))
    friend_edges = {
        pair for pair in sorted(co_pairs) if rng.random() < spec.friend_prob
    }

    event_tags: dict[str, set[str]] = {}
    for e, t in event_tag_edges:
        event_tags.setdefault(e, set()).add(t)
    profiles: dict[str, Counter] = {}
    for e, u in event_user_edges:
        profile = profiles.setdefault(u, Counter())
        for t in event_tags.get(e, ()):
            profile[t] += 1

    dataset = Dataset(
        users=frozenset(active_users),
        events=frozenset(active_events),
        tags=frozenset(t for _, t in event_tag_edges),
        event_user_edges=frozenset(event_user_edges),
        event_tag_edges=frozenset(event_tag_edges),
        friend_edges=frozenset(friend_edges),
        user_profiles=profiles,
    )
    if not dataset.events:
        raise ValueError("planted parameters produced an empty dataset")

    truth = PlantedTruth(
        event_topic={events[e]: topic_ids[event_topic_idx[e]] for e in range(n_events)},
        user_topic={users[u]: topic_ids[user_topic_idx[u]] for u in range(n_users)},
        tag_topic={
            tags[int(t)]: topic_ids[z]
            for z in range(n_topics)
            for t in tag_pool[z]
        },
    )
    return dataset, truth


def write_planted_tsv(dataset: Dataset, truth: PlantedTruth, out_dir: str | Path) -> None:
    """Write the five dataset TSV files plus ``ground_truth.tsv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def dump(name: str, rows) -> None:
        with open(out / name, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write("\t".join(row) + "\n")

    dump("event_user.tsv", sorted(dataset.event_user_edges))
    dump("event_tag.tsv", sorted(dataset.event_tag_edges))
    dump("tag_topic.tsv", sorted(truth.tag_topic.items()))
    dump("friends.tsv", sorted(dataset.friend_edges))
    dump(
        "user_tags.tsv",
        (
            (u, t)
            for u in sorted(dataset.user_profiles)
            for t, c in sorted(dataset.user_profiles[u].items())
            for _ in range(c)
        ),
    )
    with open(out / "ground_truth.tsv", "w", encoding="utf-8") as fh:
        fh.write("# events\n")
        for e, z in sorted(truth.event_topic.items()):
            fh.write(f"{e}\t{z}\n")
        fh.write("# users\n")
        for u, z in sorted(truth.user_topic.items()):
            fh.write(f"{u}\t{z}\n")


def read_ground_truth(path: str | Path) -> tuple[dict[str, str], dict[str, str]]:
    """Parse ``ground_truth.tsv`` back into event and user topic maps."""
    event_topic: dict[str, str] = {}
    user_topic: dict[str, str] = {}
    section = event_topic
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                section = user_topic if "user" in line else event_topic
                continue
            key, topic = line.split("\t")
            section[key] = topic
    return event_topic, user_topic
