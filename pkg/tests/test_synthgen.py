from __future__ import annotations

import numpy as np
import pytest

from topicomm.graph import load_dataset, user_user_projection
from topicomm.synthgen import (
    PlantedSpec,
    generate_planted_esbn,
    read_ground_truth,
    write_planted_tsv,
)


def connected_components(graph) -> int:
    seen: set[str] = set()
    count = 0
    for start in graph.nodes:
        if start in seen:
            continue
        count += 1
        stack = [start]
        seen.add(start)
        while stack:
            u = stack.pop()
            for v in graph.neighbors[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
    return count


class TestSpecValidation:
    def test_p_out_must_be_below_p_in(self):
        with pytest.raises(ValueError):
            PlantedSpec(p_in=0.2, p_out=0.2)

    def test_tag_noise_range(self):
        with pytest.raises(ValueError):
            PlantedSpec(tag_noise=1.0)

    def test_participation_mode(self):
        with pytest.raises(ValueError):
            PlantedSpec(participation="zipf")


class TestGeneration:
    def test_block_diagonal_when_noise_free(self):
        spec = PlantedSpec(p_in=0.5, p_out=0.0, tag_noise=0.0, rng_seed=3)
        dataset, truth = generate_planted_esbn(spec)
        user_topic = truth.user_topic
        for event, user in dataset.event_user_edges:
            assert truth.event_topic[event] == user_topic[user]
        for event, tag in dataset.event_tag_edges:
            assert truth.event_topic[event] == truth.tag_topic[tag]

    def test_components_equal_topics_without_cross_edges(self):
        spec = PlantedSpec(p_in=0.5, p_out=0.0, tag_noise=0.0, rng_seed=3)
        dataset, _ = generate_planted_esbn(spec)
        graph = user_user_projection(dataset)
        assert connected_components(graph) == spec.n_topics

    def test_same_seed_reproduces(self):
        a, _ = generate_planted_esbn(PlantedSpec(rng_seed=11))
        b, _ = generate_planted_esbn(PlantedSpec(rng_seed=11))
        assert a.event_user_edges == b.event_user_edges
        assert a.event_tag_edges == b.event_tag_edges
        assert a.friend_edges == b.friend_edges

    def test_different_seed_differs(self):
        a, _ = generate_planted_esbn(PlantedSpec(rng_seed=11))
        b, _ = generate_planted_esbn(PlantedSpec(rng_seed=12))
        assert a.event_user_edges != b.event_user_edges

    def test_cross_block_edge_count_within_three_sigma(self):
        spec = PlantedSpec(rng_seed=7)
        dataset, truth = generate_planted_esbn(spec)
        cross = sum(
            1
            for event, user in dataset.event_user_edges
            if truth.event_topic[event] != truth.user_topic[user]
        )
        n_events = spec.n_topics * spec.events_per_topic
        foreign_users = (spec.n_topics - 1) * spec.users_per_topic
        trials = n_events * foreign_users
        mean = trials * spec.p_out
        sigma = np.sqrt(trials * spec.p_out * (1.0 - spec.p_out))
        assert abs(cross - mean) <= 3.0 * sigma

    def test_every_event_has_user_and_tag(self):
        dataset, _ = generate_planted_esbn(PlantedSpec(rng_seed=5))
        users = dataset.event_users()
        tags = dataset.event_tags()
        for event in dataset.events:
            assert users[event]
            assert tags[event]

    def test_power_mode_is_heavier_tailed(self):
        uniform, _ = generate_planted_esbn(PlantedSpec(rng_seed=7))
        power, _ = generate_planted_esbn(
            PlantedSpec(rng_seed=7, participation="power")
        )

        def max_over_mean(ds):
            counts = [len(evs) for evs in ds.user_events().values() if evs]
            return max(counts) / np.mean(counts)

        assert max_over_mean(power) > max_over_mean(uniform)

    def test_profiles_follow_attended_events(self):
        dataset, _ = generate_planted_esbn(PlantedSpec(rng_seed=2))
        event_tags = dataset.event_tags()
        attended = dataset.user_events()
        user = sorted(dataset.users)[0]
        expected: dict[str, int] = {}
        for event in attended[user]:
            for tag in event_tags[event]:
                expected[tag] = expected.get(tag, 0) + 1
        assert dict(dataset.user_profiles[user]) == expected


class TestRoundTrip:
    def test_tsv_write_then_load(self, tmp_path):
        dataset, truth = generate_planted_esbn(PlantedSpec(rng_seed=4))
        write_planted_tsv(dataset, truth, tmp_path)
        loaded = load_dataset(tmp_path)
        assert loaded.event_user_edges == dataset.event_user_edges
        assert loaded.event_tag_edges == dataset.event_tag_edges
        assert loaded.friend_edges == dataset.friend_edges
        assert loaded.user_profiles == dataset.user_profiles

    def test_ground_truth_round_trip(self, tmp_path):
        dataset, truth = generate_planted_esbn(PlantedSpec(rng_seed=4))
        write_planted_tsv(dataset, truth, tmp_path)
        events, users = read_ground_truth(tmp_path / "ground_truth.tsv")
        assert events == truth.event_topic
        assert users == truth.user_topic

    def test_all_five_files_written(self, tmp_path):
        dataset, truth = generate_planted_esbn(PlantedSpec(rng_seed=4))
        write_planted_tsv(dataset, truth, tmp_path)
        for name in (
            "event_user.tsv",
            "event_tag.tsv",
            "tag_topic.tsv",
            "friends.tsv",
            "user_tags.tsv",
            "ground_truth.tsv",
        ):
            assert (tmp_path / name).exists()
