from __future__ import annotations

import sys
from collections import Counter
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from topicomm.graph import Config, Dataset
from topicomm.synthgen import PlantedSpec, generate_planted_esbn, write_planted_tsv


def make_dataset(
    event_user,
    event_tag,
    friends=(),
    profiles=None,
) -> Dataset:
    """Build a Dataset from bare edge lists."""
    eu = frozenset(event_user)
    et = frozenset(event_tag)
    fr = frozenset(tuple(sorted(p)) for p in friends)
    users = {u for _, u in eu} | {u for p in fr for u in p}
    if profiles:
        users |= set(profiles)
    return Dataset(
        users=frozenset(users),
        events=frozenset({e for e, _ in eu} | {e for e, _ in et}),
        tags=frozenset(t for _, t in et),
        event_user_edges=eu,
        event_tag_edges=et,
        friend_edges=fr,
        user_profiles={u: Counter(p) for u, p in (profiles or {}).items()},
    )


@pytest.fixture
def two_block_dataset() -> Dataset:
    """Two clean topical blocks: events a* share users/tags, events b* too."""
    event_user = [
        ("a1", "u1"), ("a1", "u2"), ("a2", "u1"), ("a2", "u2"), ("a2", "u3"),
        ("b1", "v1"), ("b1", "v2"), ("b2", "v2"), ("b2", "v3"), ("b1", "v3"),
    ]
    event_tag = [
        ("a1", "rock"), ("a1", "indie"), ("a2", "rock"), ("a2", "metal"),
        ("b1", "python"), ("b1", "web"), ("b2", "python"), ("b2", "api"),
    ]
    friends = [("u1", "u2"), ("v1", "v2")]
    profiles = {
        "u1": {"rock": 2, "indie": 1},
        "u2": {"rock": 1, "metal": 1},
        "v1": {"python": 2},
        "v2": {"python": 1, "web": 1},
    }
    return make_dataset(event_user, event_tag, friends, profiles)


@pytest.fixture(scope="session")
def planted_default():
    """The default planted network plus its ground truth."""
    return generate_planted_esbn(PlantedSpec())


@pytest.fixture(scope="session")
def planted_dir(tmp_path_factory) -> Path:
    """Default planted dataset written out as TSV files."""
    out = tmp_path_factory.mktemp("planted")
    dataset, truth = generate_planted_esbn(PlantedSpec())
    write_planted_tsv(dataset, truth, out)
    return out


@pytest.fixture
def default_cfg() -> Config:
    return Config()
