import math
import random

import numpy as np
import pytest

from oracles import hac_oracle
from sbld.clustering import (
    ScoredEvent,
    aggregate_score,
    cluster_arrays,
    cluster_scores,
    hac_complete,
    rank_clusters,
    replace_unbounded,
    threshold,
)
from sbld.errors import UsageError


def events(values):
    return [ScoredEvent(i, v) for i, v in enumerate(values)]


def as_sets(partition):
    return sorted(sorted(e.event_id for e in c) for c in partition)


class TestThreshold:
    def test_three_values(self):
        assert threshold([1, 1, 0.5]) == pytest.approx(0.23570, abs=1e-5)

    def test_two_values(self):
        assert threshold([0, 1]) == 0.5

    def test_single_value(self):
        assert threshold([0.7]) == 0.0

    def test_order_independent(self):
        values = [0.55, 0.69, 0.18, 0.63, 0.16, 0.08, 0.53, 0.03]
        assert threshold(values) == threshold(values[::-1]) == threshold(sorted(values))

    def test_matches_numpy(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            v = rng.random(rng.integers(1, 60))
            assert threshold(v) == pytest.approx(float(np.std(v)), rel=1e-12, abs=1e-15)

    def test_empty(self):
        with pytest.raises(UsageError):
            threshold([])


class TestHac:
    def test_three_values(self):
        evs = events([1.0, 1.0, 0.5])
        parts = hac_complete(evs, threshold([1.0, 1.0, 0.5]))
        assert as_sets(parts) == [[0, 1], [2]]

    def test_two_values_merge_at_exact_threshold(self):
        assert as_sets(hac_complete(events([0.0, 1.0]), 0.5)) == [[0], [1]]
        assert as_sets(hac_complete(events([0.0, 0.5]), 0.5)) == [[0, 1]]

    def test_identical_scores_form_one_cluster(self):
        assert as_sets(hac_complete(events([0.3] * 6), 0.0)) == [[0, 1, 2, 3, 4, 5]]

    def test_complete_not_single_linkage(self):
        # single linkage would chain all four points together
        parts = hac_complete(events([0.0, 0.4, 0.8, 1.2]), 0.5)
        assert as_sets(parts) == [[0, 1], [2, 3]]

    def test_equal_distance_tie_goes_to_smallest_id(self):
        # 0.5 can join 0.0 or 1.0 at the same distance; the pair holding id 0 merges first
        evs = [ScoredEvent(5, 1.0), ScoredEvent(0, 0.0), ScoredEvent(3, 0.5)]
        assert as_sets(hac_complete(evs, 0.5)) == [[0, 3], [5]]

    def test_ascending_order(self):
        parts = hac_complete(events([0.9, 0.1, 0.5]), 0.0)
        assert [c[0].score for c in parts] == [0.1, 0.5, 0.9]

    def test_rejects_infinite(self):
        with pytest.raises(UsageError):
            hac_complete(events([1.0, math.inf]), 1.0)

    def test_matches_naive_complete_linkage(self):
        rng = random.Random(11)
        for _ in range(300):
            n = rng.randint(1, 14)
            values = rng.sample(range(1000), n)
            values = [v / 997 for v in values]
            ids = rng.sample(range(100), n)
            t = rng.choice([threshold(values), rng.random() * 0.5])
            got = hac_complete([ScoredEvent(i, v) for i, v in zip(ids, values)], t)
            want = hac_oracle(list(zip(ids, values)), t)
            assert as_sets(got) == sorted(sorted(i for i, _ in c) for c in want)


class TestProperties:
    @pytest.mark.parametrize("seed", range(5))
    def test_diameter_partition_contiguity(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(60):
            n = int(rng.integers(1, 120))
            values = np.round(rng.random(n) * rng.choice([1, 10, 100]), int(rng.integers(0, 4)))
            t = threshold(values)
            parts = hac_complete(events(values.tolist()), t)
            ids = [e.event_id for c in parts for e in c]
            assert sorted(ids) == list(range(n))
            for c in parts:
                s = [e.score for e in c]
                assert max(s) - min(s) <= t
            for left, right in zip(parts, parts[1:]):
                assert max(e.score for e in left) <= min(e.score for e in right)


class TestRanking:
    def test_aggregate_mean_and_max(self):
        assert aggregate_score([0.2, 0.4], "mean") == pytest.approx(0.3)
        assert aggregate_score([0.2, 0.4], "max") == 0.4
        with pytest.raises(UsageError):
            aggregate_score([1.0], "median")

    def test_tie_on_aggregate_broken_by_max(self):
        a = [ScoredEvent(1, 0.5), ScoredEvent(2, 0.5)]
        b = [ScoredEvent(3, 0.25), ScoredEvent(4, 0.75)]
        ranked = rank_clusters([a, b])
        assert ranked[0].aggregate == ranked[1].aggregate
        assert ranked[0].max_score == 0.75

    def test_full_tie_broken_by_smallest_id(self):
        ranked = rank_clusters([[ScoredEvent(9, 0.5)], [ScoredEvent(2, 0.5)]])
        assert [min(c.event_ids) for c in ranked] == [2, 9]

    def test_cluster_scores_agrees_with_object_path(self):
        rng = random.Random(5)
        for _ in range(100):
            n = rng.randint(1, 30)
            scores = {rng.randrange(500): round(rng.random(), 2) for _ in range(n)}
            t, clusters = cluster_scores(scores)
            evs = [ScoredEvent(i, v) for i, v in scores.items()]
            want = rank_clusters(hac_complete(evs, threshold(list(scores.values()))))
            assert t == threshold(list(scores.values()))
            assert [c.members for c in clusters] == [c.members for c in want]

    def test_highest_cluster_first(self):
        _, clusters = cluster_scores({1: 0.1, 2: 0.9, 3: 0.95, 4: 0.12})
        assert clusters[0].event_ids == {2, 3}


class TestUnbounded:
    def test_replacement_on_top(self):
        out = replace_unbounded([1.0, math.inf, 0.0])
        assert out[1] == 1.5 and out[0] == 1.0

    def test_all_unbounded(self):
        assert replace_unbounded([math.inf, math.inf]) == [1.0, 1.0]

    def test_unbounded_events_cluster_first(self):
        ca = cluster_arrays(np.array([0, 1, 2]), np.array([4.5, math.inf, 0.2]))
        top_ids, _ = ca.ranked()[0]
        assert 1 in top_ids.tolist()
        assert np.isfinite(ca.scores).all()
