"""Evaluation harness: ground truth, quality measures, chronological sweep,
evidence configurations, pattern-search baseline and CSV emission."""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
import math
import re
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .abstraction import AbstractedLog, EventVocabulary, Verdict
from .clustering import cluster_arrays
from .errors import ConfigError, UsageError
from .spectrum import ALL_MEASURES, Measure, build_matrix, score_arrays
from .stats import ComparisonResult, compare_variants

log = logging.getLogger(__name__)

# applied to casefolded text, so e.g. "ﬀail" counts and dotted "İ" does not
BASELINE_PATTERN = re.compile("error|fault|fail")

VARIANT_PAIRS: tuple[tuple[str, str], ...] = (
    ("baseline", "minimal"),
    ("baseline", "maximal"),
    ("baseline", "median"),
    ("minimal", "maximal"),
    ("minimal", "median"),
    ("maximal", "median"),
)
METRICS = ("effort_reduction", "recall")


class ExcludedLog(UsageError):
    """A failing log that cannot take part in the evaluation."""


@dataclass(frozen=True)
class Signature:
    name: str
    sub_patterns: tuple[str, ...]
    regexes: tuple[re.Pattern, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.sub_patterns:
            raise ConfigError(f"signature {self.name!r} has no sub-patterns")
        try:
            compiled = tuple(re.compile(p, re.MULTILINE) for p in self.sub_patterns)
        except re.error as exc:
            raise ConfigError(f"signature {self.name!r}: invalid sub-pattern: {exc}") from exc
        object.__setattr__(self, "regexes", compiled)

    def matches(self, texts: Iterable[str]) -> bool:
        """True iff every sub-pattern matches at least one of ``texts``."""
        texts = list(texts)
        return all(any(rx.search(t) for t in texts) for rx in self.regexes)

    def matching_texts(self, texts: Iterable[str]) -> list[str]:
        return [t for t in texts if any(rx.search(t) for rx in self.regexes)]


def load_signatures(path: str | Path, mapping_path: str | Path | None = None) -> tuple[dict[str, Signature], dict[str, str]]:
    """Read signatures and the test -> signature-name assignment.

    The file is either ``{"signatures": [...], "tests": {...}}`` or a bare
    list of signatures with the mapping in a separate JSON object file.
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        mapping = json.loads(Path(mapping_path).read_text(encoding="utf-8")) if mapping_path else None
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read signatures: {exc}") from exc
    if isinstance(doc, dict):
        entries = doc.get("signatures", [])
        mapping = mapping if mapping is not None else doc.get("tests", {})
    else:
        entries = doc
    if mapping is None:
        raise ConfigError("no test -> signature mapping supplied")
    sigs: dict[str, Signature] = {}
    for entry in entries:
        try:
            sig = Signature(entry["name"], tuple(entry["sub_patterns"]))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed signature entry {entry!r}") from exc
        sigs[sig.name] = sig
    for test, name in mapping.items():
        if name not in sigs:
            raise ConfigError(f"test {test!r} refers to unknown signature {name!r}")
    return sigs, dict(mapping)


def ground_truth(log_: AbstractedLog, sig: Signature, vocab: EventVocabulary) -> frozenset[int]:
    """Events of ``log_`` whose abstracted text matches any sub-pattern."""
    distinct = sorted(log_.distinct_events)
    texts = [vocab.text(e) for e in distinct]
    if not sig.matches(texts):
        raise ExcludedLog(f"{log_.source_id}: does not satisfy every sub-pattern of signature {sig.name!r}")
    return frozenset(e for e, t in zip(distinct, texts) if any(rx.search(t) for rx in sig.regexes))


def lint_signature(sig: Signature, logs: Sequence[AbstractedLog], vocab: EventVocabulary) -> list[str]:
    """Sub-patterns that match every log of a test set and so cannot discriminate."""
    if not logs:
        return []
    flagged = []
    for pattern, rx in zip(sig.sub_patterns, sig.regexes):
        if all(any(rx.search(vocab.text(e)) for e in lg.distinct_events) for lg in logs):
            flagged.append(pattern)
    return flagged


def recall_best(retrieved: Iterable[int], relevant: Iterable[int]) -> float:
    relevant = set(relevant)
    if not relevant:
        raise ExcludedLog("recall undefined for an empty relevant set")
    return len(relevant.intersection(retrieved)) / len(relevant)


def effort_reduction(retrieved_count: int, log_event_count: int) -> float:
    if not 1 <= retrieved_count <= log_event_count:
        raise UsageError(f"need 1 <= retrieved ({retrieved_count}) <= events in log ({log_event_count})")
    return 1.0 - retrieved_count / log_event_count


def baseline_search(log_: AbstractedLog, vocab: EventVocabulary) -> frozenset[int]:
    """Events whose text contains 'error', 'fault' or 'fail' in any case."""
    return frozenset(e for e in log_.distinct_events if BASELINE_PATTERN.search(vocab.text(e).casefold()))


@dataclass(frozen=True)
class Quality:
    effort_reduction: float
    recall: float
    empty_retrieval: bool = False


def retrieval_quality(retrieved: Iterable[int], relevant: Iterable[int], log_event_count: int) -> Quality:
    """Recall and ER for a retrieved set; an empty retrieval scores ER 1, recall 0."""
    retrieved = set(retrieved)
    if not retrieved:
        return Quality(1.0, 0.0, True)
    return Quality(effort_reduction(len(retrieved), log_event_count), recall_best(retrieved, relevant))


def chronological(logs: Iterable[AbstractedLog]) -> list[AbstractedLog]:
    return sorted(logs, key=lambda lg: (lg.produced_at, lg.source_id))


def group_of(source_id: str) -> str:
    """Test name of a log: the first path component of its source ID."""
    return source_id.replace("\\", "/").split("/", 1)[0]


@dataclass
class TestSet:
    """One test's chronologically sorted failing/passing logs and ground truth."""

    __test__ = False

    name: str
    failing: list[AbstractedLog]
    passing: list[AbstractedLog]
    relevant: dict[str, frozenset[int]]
    excluded: list[str] = field(default_factory=list)
    lint: list[str] = field(default_factory=list)


def prepare_tests(
    logs: Sequence[AbstractedLog],
    vocab: EventVocabulary,
    signatures: Mapping[str, Signature],
    assignment: Mapping[str, str],
) -> list[TestSet]:
    """Group logs by test, attach ground truth and drop inadmissible logs.

    Failing logs that do not satisfy their test's signature are removed from
    the test set altogether.
    """
    grouped: dict[str, list[AbstractedLog]] = {}
    for lg in logs:
        grouped.setdefault(group_of(lg.source_id), []).append(lg)
    tests = []
    for name in sorted(grouped):
        members = grouped[name]
        if name not in assignment:
            log.warning("test %s has no signature assigned; excluded", name)
            continue
        sig = signatures[assignment[name]]
        failing, relevant, excluded = [], {}, []
        for lg in chronological(m for m in members if m.verdict is Verdict.FAIL):
            try:
                rel = ground_truth(lg, sig, vocab)
            except ExcludedLog as exc:
                log.warning("%s; excluded", exc)
                excluded.append(lg.source_id)
                continue
            failing.append(lg)
            relevant[lg.source_id] = rel
        passing = chronological(m for m in members if m.verdict is Verdict.PASS)
        lint = lint_signature(sig, members, vocab)
        for pattern in lint:
            log.warning("signature %s: sub-pattern %r matches every log of test %s", sig.name, pattern, name)
        if not failing:
            log.warning("test %s has no admissible failing logs; excluded", name)
            continue
        tests.append(TestSet(name, failing, passing, relevant, excluded, lint))
    return tests


def _quality_by_measure(
    event_ids: np.ndarray,
    scores: Sequence[np.ndarray],
    relevant: np.ndarray,
    k: int,
    aggregate: str,
) -> list[Quality]:
    """Quality of the top-k clusters for each score vector.

    ``relevant`` is a boolean mask aligned with ``event_ids``.
    """
    n = len(event_ids)
    n_relevant = int(relevant.sum())
    out = []
    for s in scores:
        ca = cluster_arrays(event_ids, s, aggregate)
        hit = ca.retrieved_mask(k)
        retrieved = int(hit.sum())
        found = int(relevant[ca.order][hit].sum())
        out.append(Quality(1.0 - retrieved / n, found / n_relevant))
    return out


def evaluate_target(
    target: AbstractedLog,
    failing: Sequence[AbstractedLog],
    passing: Sequence[AbstractedLog],
    relevant: frozenset[int],
    measures: Sequence[Measure] = ALL_MEASURES,
    k: int = 1,
    aggregate: str = "mean",
) -> list[Quality]:
    """Per-measure quality of SBLD on ``target`` with a spectrum of (failing, passing)."""
    if not relevant:
        raise ExcludedLog(f"{target.source_id}: empty ground truth")
    matrix = build_matrix(failing, passing)
    events = matrix.row_events(target.source_id)
    cols = [matrix.column_of(e) for e in events]
    prims = [a[cols] for a in matrix.primitive_arrays()]
    mask = np.array([e in relevant for e in events], dtype=bool)
    scores = [score_arrays(*prims, m) for m in measures]
    return _quality_by_measure(np.array(events, dtype=np.int64), scores, mask, k, aggregate)


def median_quality(qualities: Sequence[Quality]) -> tuple[float, float]:
    return (statistics.median(q.effort_reduction for q in qualities),
            statistics.median(q.recall for q in qualities))


@dataclass(frozen=True)
class SweepRecord:
    test: str
    i: int
    j: int
    target: str
    median_effort_reduction: float
    median_recall: float


def _sweep_rows(test: TestSet, rows: Sequence[int], measures: Sequence[Measure], k: int, aggregate: str) -> list[SweepRecord]:
    failing, passing = test.failing, test.passing
    columns = sorted({e for lg in failing + passing for e in lg.events})
    col = {e: c for c, e in enumerate(columns)}
    ids = np.array(columns, dtype=np.int64)

    def coverage(logs: Sequence[AbstractedLog]) -> np.ndarray:
        cum = np.zeros((len(logs) + 1, len(columns)), dtype=np.int64)
        for r, lg in enumerate(logs, start=1):
            cum[r] = cum[r - 1]
            cum[r, [col[e] for e in lg.distinct_events]] += 1
        return cum

    cum_f, cum_p = coverage(failing), coverage(passing)
    target_cols = [np.array(sorted(col[e] for e in lg.distinct_events), dtype=np.int64) for lg in failing]
    relevant = [np.isin(ids[c], sorted(test.relevant[lg.source_id])) for c, lg in zip(target_cols, failing)]
    records = []
    for i in rows:
        for j in range(len(passing) + 1):
            n_fi, n_pi = cum_f[i], cum_p[j]
            scores = [score_arrays(n_fi, i - n_fi, n_pi, j - n_pi, m) for m in measures]
            for t in range(i):
                cols = target_cols[t]
                quals = _quality_by_measure(ids[cols], [s[cols] for s in scores], relevant[t], k, aggregate)
                er, rec = median_quality(quals)
                records.append(SweepRecord(test.name, i, j, failing[t].source_id, er, rec))
    return records


def _sweep_job(args) -> list[SweepRecord]:
    return _sweep_rows(*args)


def sweep(
    test: TestSet,
    measures: Sequence[Measure] = ALL_MEASURES,
    k: int = 1,
    aggregate: str = "mean",
    jobs: int = 1,
) -> list[SweepRecord]:
    """Grow the spectrum chronologically: i failing x j passing logs.

    For every i in 1..|F| and j in 0..|P| each of the first i failing logs is
    analysed with the first i failing and first j passing logs as spectrum,
    recording the median ER and recall over ``measures``.
    """
    rows = list(range(1, len(test.failing) + 1))
    if jobs <= 1 or len(rows) <= 1:
        records = _sweep_rows(test, rows, measures, k, aggregate)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = pool.map(_sweep_job, [(test, [i], measures, k, aggregate) for i in rows])
            records = [r for chunk in chunks for r in chunk]
    return sorted(records, key=lambda r: (r.test, r.i, r.j, r.target))


def sweep_record_count(n_failing: int, n_passing: int) -> int:
    return (n_passing + 1) * n_failing * (n_failing + 1) // 2


class Evidence(str, enum.Enum):
    MINIMAL = "minimal"
    MEDIAN = "median"
    MAXIMAL = "maximal"


def evidence_config(
    failing: Sequence[AbstractedLog],
    passing: Sequence[AbstractedLog],
    target: AbstractedLog,
    variant: Evidence,
) -> tuple[list[AbstractedLog], list[AbstractedLog]]:
    """Spectrum data for ``target`` under an evidence configuration.

    Inputs are expected in chronological order. MEDIAN takes the first
    ceil(|F|/2) failing logs, swapping the target in for the last one when
    it falls outside that prefix, plus the first ceil(|P|/2) passing logs.
    """
    if variant is Evidence.MINIMAL:
        if not passing:
            raise UsageError("minimal evidence needs at least one passing log")
        return [target], [passing[0]]
    if variant is Evidence.MAXIMAL:
        return list(failing), list(passing)
    f = list(failing[: math.ceil(len(failing) / 2)])
    if all(lg.source_id != target.source_id for lg in f):
        f[-1] = target
    return f, list(passing[: math.ceil(len(passing) / 2)])


@dataclass(frozen=True)
class PerLogScore:
    test: str
    target: str
    variant: str
    metric: str
    value: float
    note: str = ""


def evaluate_variants(
    test: TestSet,
    vocab: EventVocabulary,
    measures: Sequence[Measure] = ALL_MEASURES,
    k: int = 1,
    aggregate: str = "mean",
) -> list[PerLogScore]:
    """Per-target scores for the baseline and the three evidence configurations."""
    out = []
    for target in test.failing:
        relevant = test.relevant[target.source_id]
        q = retrieval_quality(baseline_search(target, vocab), relevant, len(target.distinct_events))
        note = "empty_retrieval" if q.empty_retrieval else ""
        out.append(PerLogScore(test.name, target.source_id, "baseline", "effort_reduction", q.effort_reduction, note))
        out.append(PerLogScore(test.name, target.source_id, "baseline", "recall", q.recall, note))
        for variant in Evidence:
            try:
                f, p = evidence_config(test.failing, test.passing, target, variant)
            except UsageError as exc:
                log.warning("%s: %s variant skipped: %s", target.source_id, variant.value, exc)
                continue
            er, rec = median_quality(evaluate_target(target, f, p, relevant, measures, k, aggregate))
            out.append(PerLogScore(test.name, target.source_id, variant.value, "effort_reduction", er))
            out.append(PerLogScore(test.name, target.source_id, variant.value, "recall", rec))
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def sweep_to_csv(records: Sequence[SweepRecord]) -> str:
    return _csv(
        ["test", "i", "j", "source_id", "median_er", "median_recall"],
        ([r.test, r.i, r.j, r.target, _fmt(r.median_effort_reduction), _fmt(r.median_recall)]
         for r in sorted(records, key=lambda r: (r.test, r.i, r.j, r.target))),
    )


def heatmap_cells(records: Sequence[SweepRecord]) -> list[tuple[str, int, int, float, float]]:
    cells: dict[tuple[str, int, int], list[SweepRecord]] = {}
    for r in records:
        cells.setdefault((r.test, r.i, r.j), []).append(r)
    return [
        (test, i, j,
         statistics.median(r.median_effort_reduction for r in group),
         statistics.median(r.median_recall for r in group))
        for (test, i, j), group in sorted(cells.items())
    ]


def emit_heatmap(records: Sequence[SweepRecord]) -> str:
    return _csv(
        ["test", "i", "j", "median_er", "median_recall"],
        ([t, i, j, _fmt(er), _fmt(rec)] for t, i, j, er, rec in heatmap_cells(records)),
    )


def per_log_to_csv(scores: Sequence[PerLogScore]) -> str:
    return _csv(
        ["test", "source_id", "variant", "metric", "value", "note"],
        ([s.test, s.target, s.variant, s.metric, _fmt(s.value), s.note]
         for s in sorted(scores, key=lambda s: (s.test, s.target, s.variant, s.metric))),
    )


def compare_per_log(scores: Sequence[PerLogScore]) -> list[ComparisonResult]:
    samples: dict[str, dict[str, dict[str, float]]] = {}
    for s in scores:
        samples.setdefault(s.variant, {}).setdefault(s.metric, {})[f"{s.test}\x00{s.target}"] = s.value
    for variant in {v for pair in VARIANT_PAIRS for v in pair}:
        samples.setdefault(variant, {})
        for metric in METRICS:
            samples[variant].setdefault(metric, {})
    return compare_variants(samples, VARIANT_PAIRS, METRICS)


@dataclass
class EvaluationResult:
    tests: list[TestSet]
    sweep: list[SweepRecord]
    per_log: list[PerLogScore]
    comparisons: list[ComparisonResult]

    def write(self, out_dir: str | Path) -> dict[str, Path]:
        from .stats import comparisons_to_csv

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = {
            "sweep.csv": sweep_to_csv(self.sweep),
            "heatmap.csv": emit_heatmap(self.sweep),
            "per_log_scores.csv": per_log_to_csv(self.per_log),
            "compare.csv": comparisons_to_csv(self.comparisons),
        }
        paths = {}
        for name, text in files.items():
            paths[name] = out / name
            paths[name].write_text(text, encoding="utf-8")
        return paths


def run_evaluation(
    logs: Sequence[AbstractedLog],
    vocab: EventVocabulary,
    signatures: Mapping[str, Signature],
    assignment: Mapping[str, str],
    measures: Sequence[Measure] = ALL_MEASURES,
    k: int = 1,
    aggregate: str = "mean",
    jobs: int = 1,
    run_sweep: bool = True,
) -> EvaluationResult:
    tests = prepare_tests(logs, vocab, signatures, assignment)
    if not tests:
        raise ExcludedLog("no admissible failing logs in any test")
    records: list[SweepRecord] = []
    if run_sweep:
        for test in tests:
            records.extend(sweep(test, measures, k, aggregate, jobs))
    per_log = [s for test in tests for s in evaluate_variants(test, vocab, measures, k, aggregate)]
    return EvaluationResult(tests, records, per_log, compare_per_log(per_log))
