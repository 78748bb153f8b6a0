"""Complete-linkage clustering of event scores and cluster ranking."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import UsageError

AGGREGATES = ("mean", "max")


@dataclass(frozen=True, order=True)
class ScoredEvent:
    event_id: int
    score: float


@dataclass(frozen=True)
class ScoredCluster:
    members: tuple[ScoredEvent, ...]
    aggregate: float

    @property
    def event_ids(self) -> frozenset[int]:
        return frozenset(e.event_id for e in self.members)

    @property
    def max_score(self) -> float:
        return max(e.score for e in self.members)

    @property
    def min_score(self) -> float:
        return min(e.score for e in self.members)

    def __len__(self) -> int:
        return len(self.members)


def threshold(scores: Sequence[float]) -> float:
    """Uncorrected sample standard deviation, as ``numpy.std`` with ddof=0.

    Values are summed in ascending order, so the result does not depend on
    input order and both kernel backends agree to the last bit.
    """
    if len(scores) == 0:
        raise UsageError("threshold of an empty score list is undefined")
    return float(kernels.uncorrected_std(np.sort(np.asarray(scores, dtype=np.float64))))


def replace_unbounded(scores: Sequence[float]) -> list[float]:
    """Swap +inf scores for a finite stand-in above every finite score.

    The stand-in is the largest finite score plus the standard deviation of
    the finite scores (1.0 if that is zero), which keeps all distances finite
    while leaving the unbounded events on top.
    """
    finite = [s for s in scores if math.isfinite(s)]
    if len(finite) == len(scores):
        return list(scores)
    if not finite:
        return [1.0] * len(scores)
    unit = threshold(finite) or 1.0
    top = max(finite) + unit
    return [s if math.isfinite(s) else top for s in scores]


def hac_complete(events: Sequence[ScoredEvent], t: float) -> list[list[ScoredEvent]]:
    """Partition ``events`` by complete-linkage HAC on |score difference|.

    Clusters merge greedily, closest pair first, while the merged diameter
    stays <= ``t``. Equal-distance candidates merge in order of their
    smallest event ID. Clusters are returned in ascending score order.
    """
    if not events:
        raise UsageError("cannot cluster an empty event list")
    ordered = sorted(events, key=lambda e: (e.score, e.event_id))
    values = np.fromiter((e.score for e in ordered), dtype=np.float64, count=len(ordered))
    if not np.all(np.isfinite(values)):
        raise UsageError("scores must be finite before clustering")
    ids = np.fromiter((e.event_id for e in ordered), dtype=np.int64, count=len(ordered))
    labels = kernels.hac_sorted(values, ids, float(t))
    partition: list[list[ScoredEvent]] = [[] for _ in range(int(labels[-1]) + 1)]
    for event, label in zip(ordered, labels.tolist()):
        partition[label].append(event)
    return partition


def aggregate_score(scores: Iterable[float], how: str = "mean") -> float:
    """Mean or max of member scores (mean summed in ascending order)."""
    scores = sorted(scores)
    if how == "mean":
        total = 0.0
        for v in scores:
            total += v
        return total / len(scores)
    if how == "max":
        return scores[-1]
    raise UsageError(f"unknown aggregate {how!r}; expected one of {AGGREGATES}")


def rank_clusters(partition: Iterable[Sequence[ScoredEvent]], aggregate: str = "mean") -> list[ScoredCluster]:
    """Order clusters by aggregate score, then max member score, then smallest event ID."""
    clusters = [
        ScoredCluster(tuple(sorted(members, key=lambda e: (-e.score, e.event_id))),
                      aggregate_score((e.score for e in members), aggregate))
        for members in partition
        if members
    ]
    if not clusters:
        raise UsageError("cannot rank an empty partition")
    clusters.sort(key=lambda c: (-c.aggregate, -c.max_score, min(c.event_ids)))
    return clusters


@dataclass(frozen=True)
class ClusterArrays:
    """Clustering of one score vector in array form.

    ``ids``/``scores`` are sorted by (score, id), ``order`` being the
    permutation of the input that sorts it; ``labels`` numbers clusters left
    to right and ``rank[label]`` is the cluster's 0-based rank.
    """

    threshold: float
    order: np.ndarray
    ids: np.ndarray
    scores: np.ndarray
    labels: np.ndarray
    rank: np.ndarray

    def retrieved_mask(self, k: int) -> np.ndarray:
        return self.rank[self.labels] < k

    def ranked(self) -> list[tuple[np.ndarray, np.ndarray]]:
        out = [None] * len(self.rank)
        for label, pos in enumerate(self.rank.tolist()):
            sel = self.labels == label
            out[pos] = (self.ids[sel], self.scores[sel])
        return out


def cluster_arrays(ids: np.ndarray, scores: np.ndarray, aggregate: str = "mean") -> ClusterArrays:
    """Array-level threshold + HAC + ranking; the hot path of evaluations."""
    if aggregate not in AGGREGATES:
        raise UsageError(f"unknown aggregate {aggregate!r}; expected one of {AGGREGATES}")
    values = np.asarray(scores, dtype=np.float64)
    if len(values) == 0:
        raise UsageError("cannot cluster an empty score vector")
    if not np.isfinite(values).all():
        values = np.array(replace_unbounded(values.tolist()), dtype=np.float64)
    ids = np.asarray(ids, dtype=np.int64)
    order = np.lexsort((ids, values))
    ids_sorted, vals_sorted = ids[order], values[order]
    t, labels, rank = kernels.cluster_sorted(vals_sorted, ids_sorted, AGGREGATES.index(aggregate))
    return ClusterArrays(float(t), order, ids_sorted, vals_sorted, labels, rank)


def cluster_scores(scores: dict[int, float], aggregate: str = "mean") -> tuple[float, list[ScoredCluster]]:
    """Threshold, cluster and rank a mapping of event ID to score."""
    if not scores:
        raise UsageError("cannot cluster an empty score map")
    ids = np.array(sorted(scores), dtype=np.int64)
    ca = cluster_arrays(ids, np.array([scores[i] for i in ids.tolist()], dtype=np.float64), aggregate)
    clusters = []
    for cid, cval in ca.ranked():
        members = sorted((ScoredEvent(i, v) for i, v in zip(cid.tolist(), cval.tolist())),
                         key=lambda e: (-e.score, e.event_id))
        clusters.append(ScoredCluster(tuple(members), aggregate_score(cval.tolist(), aggregate)))
    return ca.threshold, clusters
