"""Pure-Python kernels, used when the compiled extension is unavailable.

Must produce results identical to ``_ckernels.pyx``.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

BACKEND = "python"


def hac_sorted(values, ids, threshold: float) -> np.ndarray:
    """Complete-linkage HAC of 1-D points already sorted by (value, id).

    Returns one cluster label per point; labels number the clusters from
    left to right. Only adjacent clusters are merge candidates, which is
    exact in one dimension: the span of a non-adjacent union contains the
    span of an adjacent one. Candidate order is (span, smaller min-id,
    larger min-id).
    """
    n = len(values)
    labels = np.zeros(n, dtype=np.int64)
    if n <= 1:
        return labels
    vals = [float(v) for v in values]
    minid = [int(i) for i in ids]
    lo = list(range(n))
    hi = list(range(n))
    nxt = list(range(1, n)) + [-1]
    prv = [-1] + list(range(n - 1))
    alive = [True] * n
    version = [0] * n

    def entry(a: int, b: int):
        ma, mb = minid[a], minid[b]
        if ma > mb:
            ma, mb = mb, ma
        return (vals[hi[b]] - vals[lo[a]], ma, mb, a, b, version[a], version[b])

    heap = [entry(a, a + 1) for a in range(n - 1)]
    heapq.heapify(heap)
    while heap:
        span, _, _, a, b, va, vb = heapq.heappop(heap)
        if not (alive[a] and alive[b]) or version[a] != va or version[b] != vb:
            continue
        if span > threshold:
            break
        # merge b into a
        hi[a] = hi[b]
        if minid[b] < minid[a]:
            minid[a] = minid[b]
        alive[b] = False
        c = nxt[b]
        nxt[a] = c
        if c != -1:
            prv[c] = a
        version[a] += 1
        p = prv[a]
        if p != -1:
            heapq.heappush(heap, entry(p, a))
        if c != -1:
            heapq.heappush(heap, entry(a, c))

    label = -1
    run = 0
    while run != -1:
        label += 1
        labels[lo[run]:hi[run] + 1] = label
        run = nxt[run]
    return labels


def uncorrected_std(values) -> float:
    """sqrt(mean((x - mean(x))**2)) with plain left-to-right summation."""
    n = len(values)
    total = 0.0
    for v in values:
        total += v
    mean = total / n
    sq = 0.0
    for v in values:
        d = v - mean
        sq += d * d
    return math.sqrt(sq / n)


def cluster_sorted(values, ids, aggregate: int = 0):
    """Threshold, cluster and rank 1-D points sorted by (value, id).

    ``aggregate`` is 0 for the mean of member scores, 1 for the max. Returns
    ``(threshold, labels, rank)`` where ``rank[label]`` is the 0-based
    position of that cluster when ordered by (aggregate desc, max desc,
    smallest member id asc).
    """
    vals = [float(v) for v in values]
    idl = [int(i) for i in ids]
    t = uncorrected_std(vals)
    labels = hac_sorted(vals, idl, t)
    keys = []
    start = 0
    n = len(vals)
    for end in range(1, n + 1):
        if end == n or labels[end] != labels[start]:
            if aggregate == 0:
                total = 0.0
                for v in vals[start:end]:
                    total += v
                agg = total / (end - start)
            else:
                agg = vals[end - 1]
            keys.append((-agg, -vals[end - 1], min(idl[start:end]), int(labels[start])))
            start = end
    rank = np.empty(len(keys), dtype=np.int64)
    for pos, key in enumerate(sorted(keys)):
        rank[key[3]] = pos
    return t, labels, rank
