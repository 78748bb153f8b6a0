"""End-to-end analysis of one failing target log."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .abstraction import AbstractedLog, EventVocabulary, Verdict
from .clustering import ScoredCluster, cluster_scores
from .errors import UsageError
from .spectrum import CoverageMatrix, Measure, score_arrays


@dataclass(frozen=True)
class DiagnosisReport:
    target: str
    measure: Measure
    threshold: float
    clusters: tuple[ScoredCluster, ...]
    retrieved_k: int
    events_in_log: int
    texts: dict[int, str] | None = None

    @property
    def retrieved_clusters(self) -> tuple[ScoredCluster, ...]:
        return self.clusters[: self.retrieved_k]

    @property
    def retrieved(self) -> frozenset[int]:
        return frozenset(e for c in self.retrieved_clusters for e in c.event_ids)

    @property
    def events_retrieved(self) -> int:
        return sum(len(c) for c in self.retrieved_clusters)

    def to_dict(self) -> dict:
        texts = self.texts or {}
        return {
            "target": self.target,
            "measure": self.measure.value,
            "threshold": self.threshold,
            "retrieved_k": self.retrieved_k,
            "events_in_log": self.events_in_log,
            "events_retrieved": self.events_retrieved,
            "clusters": [
                {
                    "rank": rank,
                    "aggregate": c.aggregate,
                    "retrieved": rank <= self.retrieved_k,
                    "events": [
                        {"event_id": e.event_id, "score": e.score, "text": texts.get(e.event_id)}
                        for e in c.members
                    ],
                }
                for rank, c in enumerate(self.clusters, start=1)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    def render(self) -> str:
        texts = self.texts or {}
        lines = [
            f"target: {self.target}",
            f"measure: {self.measure.value}  threshold: {self.threshold:.6g}  "
            f"retrieved: {self.events_retrieved}/{self.events_in_log} events in {self.retrieved_k} cluster(s)",
        ]
        for rank, cluster in enumerate(self.clusters, start=1):
            if rank == self.retrieved_k + 1:
                lines.append("")
                lines.append("---- not retrieved ----")
            lines.append("")
            lines.append(f"== cluster {rank} (aggregate {cluster.aggregate:.6g}, {len(cluster)} events) ==")
            for e in cluster.members:
                text = texts.get(e.event_id, "").rstrip("\n")
                lines.append(f"[{e.score:.6g}] #{e.event_id}")
                if text:
                    lines.extend("    " + line for line in text.splitlines())
        return "\n".join(lines) + "\n"


def diagnose(
    target: AbstractedLog | str,
    matrix: CoverageMatrix,
    m: Measure,
    k: int = 1,
    *,
    aggregate: str = "mean",
    vocab: EventVocabulary | None = None,
) -> DiagnosisReport:
    """Score the target's events against ``matrix``, cluster them and rank.

    ``k`` larger than the number of clusters retrieves every cluster.
    """
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    source_id = target if isinstance(target, str) else target.source_id
    if not matrix.has_row(source_id) or matrix.verdict_of(source_id) is not Verdict.FAIL:
        raise UsageError(
            f"target {source_id!r} is not a failing log in the spectrum; "
            "rebuild the spectrum with the target among the failing logs"
        )
    events = matrix.row_events(source_id)
    if not events:
        raise UsageError(f"target {source_id!r} has no events")
    cols = [matrix.column_of(e) for e in events]
    n_fi, n_fe, n_pi, n_pe = (a[cols] for a in matrix.primitive_arrays())
    scores = score_arrays(n_fi, n_fe, n_pi, n_pe, m)
    t, clusters = cluster_scores(dict(zip(events, scores.tolist())), aggregate)
    texts = {e: vocab.text(e) for e in events} if vocab is not None else None
    return DiagnosisReport(source_id, m, t, tuple(clusters), min(k, len(clusters)), len(events), texts)


def diagnose_many(
    target: AbstractedLog | str,
    matrix: CoverageMatrix,
    measures: Iterable[Measure],
    k: int = 1,
    **kwargs,
) -> list[DiagnosisReport]:
    return [diagnose(target, matrix, m, k, **kwargs) for m in measures]
