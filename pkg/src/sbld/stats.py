"""Paired comparison statistics: Wilcoxon signed-rank (Pratt), Holm, Vargha-Delaney A12."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import UsageError

log = logging.getLogger(__name__)

ALPHA = 0.05
EXACT_MAX_N = 25


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # sum of ranks of positive differences
    p_value: float
    n_effective: int  # nonzero differences
    exact: bool


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks with ties sharing the average of their positions."""
    arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(arr, kind="mergesort")
    ranks = np.empty(len(arr), dtype=np.float64)
    sorted_vals = arr[order]
    i = 0
    n = len(arr)
    while i < n:
        j = i
        while j + 1 < n and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j + 2) / 2.0
        i = j + 1
    return ranks


def _exact_p(ranks: np.ndarray, statistic: float) -> float:
    # ranks are multiples of 0.5; double them to count sums with integers
    doubled = [int(round(2 * r)) for r in ranks]
    counts = [0] * (sum(doubled) + 1)
    counts[0] = 1
    top = 0
    for r in doubled:
        for s in range(top, -1, -1):
            if counts[s]:
                counts[s + r] += counts[s]
        top += r
    t = int(round(2 * statistic))
    total = 1 << len(doubled)
    lower = sum(counts[: t + 1])
    upper = sum(counts[t:])
    return min(1.0, 2 * min(lower, upper) / total)


def wilcoxon_pratt(x: Sequence[float], y: Sequence[float] | None = None) -> WilcoxonResult:
    """Two-sided paired Wilcoxon signed-rank test with Pratt zero handling.

    Zero differences take part in ranking and are then dropped. The p-value
    is exact up to 25 nonzero differences and a continuity-corrected normal
    approximation beyond that.
    """
    d = np.asarray(x, dtype=np.float64)
    if y is not None:
        yy = np.asarray(y, dtype=np.float64)
        if yy.shape != d.shape:
            raise UsageError("paired samples must have equal length")
        d = d - yy
    if d.size == 0:
        raise UsageError("wilcoxon test needs at least one pair")
    ranks = average_ranks(np.abs(d))
    nonzero = d != 0
    n_eff = int(nonzero.sum())
    if n_eff == 0:
        return WilcoxonResult(0.0, 1.0, 0, True)
    r = ranks[nonzero]
    statistic = float(ranks[d > 0].sum())
    if n_eff <= EXACT_MAX_N:
        return WilcoxonResult(statistic, _exact_p(r, statistic), n_eff, True)
    mean = float(r.sum()) / 2.0
    sd = math.sqrt(float((r * r).sum()) / 4.0)
    z = max(abs(statistic - mean) - 0.5, 0.0) / sd
    return WilcoxonResult(statistic, min(1.0, math.erfc(z / math.sqrt(2.0))), n_eff, False)


def holm(p_values: Sequence[float]) -> list[float]:
    m = len(p_values)
    order = sorted(range(m), key=lambda i: p_values[i])
    adjusted = [0.0] * m
    running = 0.0
    for rank, i in enumerate(order):
        running = max(running, (m - rank) * p_values[i])
        adjusted[i] = min(1.0, running)
    return adjusted


def a12(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Probability that a draw from ``xs`` exceeds one from ``ys``, ties counting half."""
    if len(xs) == 0 or len(ys) == 0:
        raise UsageError("A12 needs two nonempty samples")
    a = np.asarray(xs, dtype=np.float64)[:, None]
    b = np.asarray(ys, dtype=np.float64)[None, :]
    greater = int((a > b).sum())
    equal = int((a == b).sum())
    return (greater + 0.5 * equal) / (a.shape[0] * b.shape[1])


def magnitude(effect: float) -> str:
    d = max(effect, 1.0 - effect)
    if d >= 0.71:
        return "large"
    if d >= 0.64:
        return "medium"
    if d >= 0.56:
        return "small"
    return "negligible"


@dataclass(frozen=True)
class ComparisonResult:
    variant1: str
    variant2: str
    metric: str
    statistic: float
    a12: float
    a21: float
    p_raw: float
    p_holm: float
    n_pairs: int

    @property
    def significant(self) -> bool:
        return self.p_holm < ALPHA


def compare_variants(
    samples: Mapping[str, Mapping[str, Mapping[str, float]]],
    pairs: Sequence[tuple[str, str]],
    metrics: Sequence[str],
) -> list[ComparisonResult]:
    """Pairwise comparisons with Holm correction across the whole family.

    ``samples[variant][metric][key]`` is the score of one target log; pairs
    are matched by key and only keys present in both variants are used.
    """
    raw = []
    for metric in metrics:
        for v1, v2 in pairs:
            s1, s2 = samples[v1][metric], samples[v2][metric]
            keys = sorted(set(s1) & set(s2))
            if not keys:
                log.warning("no paired observations for %s vs %s on %s; comparison skipped", v1, v2, metric)
                continue
            x = [s1[k] for k in keys]
            y = [s2[k] for k in keys]
            w = wilcoxon_pratt(x, y)
            effect = a12(x, y)
            raw.append((v1, v2, metric, w, effect, len(keys)))
    adjusted = holm([r[3].p_value for r in raw])
    return [
        ComparisonResult(v1, v2, metric, w.statistic, effect, 1.0 - effect, w.p_value, p_adj, n)
        for (v1, v2, metric, w, effect, n), p_adj in zip(raw, adjusted)
    ]


COMPARE_HEADER = ["variant1", "variant2", "metric", "statistic", "a12", "a21", "p_raw", "p_holm", "significant"]


def comparisons_to_csv(results: Sequence[ComparisonResult]) -> str:
    buf = io.StringIO()
    buf.write("# statistic = sum of ranks of positive differences (variant1 - variant2), Pratt zero handling\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COMPARE_HEADER)
    for r in results:
        writer.writerow([r.variant1, r.variant2, r.metric, repr(r.statistic), repr(r.a12), repr(r.a21),
                         repr(r.p_raw), repr(r.p_holm), str(r.significant).lower()])
    return buf.getvalue()
