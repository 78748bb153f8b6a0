"""Independent reference implementations used by the tests.

Written case-by-case from the measure formulas, without sharing code with
the package.
"""

import itertools
import math


def measure_oracle(name, nfi, nfe, npi, npe):
    F = nfi + nfe
    P = npi + npe
    if name == "Tarantula":
        fail = nfi / F if F else 0.0
        pas = npi / P if P else 0.0
        return fail / (fail + pas) if fail + pas else 0.0
    if name == "Jaccard":
        d = nfi + nfe + npi
        return nfi / d if d else 0.0
    if name == "Ochiai":
        d = F * (nfi + npi)
        return nfi / math.sqrt(d) if d else 0.0
    if name == "Ochiai2":
        d = (nfi + npi) * (nfe + npe) * F * P
        if d == 0:
            assert nfi * npe == 0
            return 0.0
        return nfi * npe / math.sqrt(d)
    if name == "Zoltar":
        if nfi == 0:
            return 0.0
        return nfi / (nfi + nfe + npi + 10000 * nfe * npi / nfi)
    if name == "DStar2":
        d = nfe + npi
        if d == 0:
            return math.inf if nfi else 0.0
        return nfi ** 2 / d
    if name == "Op":
        return nfi - npi / (P + 1)
    if name == "Wong3":
        if npi <= 2:
            h = npi
        elif npi <= 10:
            h = 2 + 0.1 * (npi - 2)
        else:
            h = 2.8 + 0.001 * (npi - 10)
        return nfi - h
    if name == "Kulczynski2":
        a = nfi / F if F else 0.0
        b = nfi / (nfi + npi) if nfi + npi else 0.0
        return (a + b) / 2
    if name == "FailedOnly":
        return 1.0 if npi == 0 else 0.0
    raise KeyError(name)


def primitives_oracle(failing, passing, event):
    """Recount (n_fi, n_fe, n_pi, n_pe) straight from event lists."""
    nfi = sum(1 for log in failing if event in log)
    npi = sum(1 for log in passing if event in log)
    return nfi, len(failing) - nfi, npi, len(passing) - npi


def hac_oracle(points, t):
    """Naive complete-linkage HAC over all cluster pairs.

    ``points`` are (id, value); candidate order is (diameter, smallest min-id,
    larger min-id), the same documented tie rule as the package.
    """
    clusters = [[p] for p in points]
    while len(clusters) > 1:
        best = None
        for a, b in itertools.combinations(range(len(clusters)), 2):
            vals = [v for _, v in clusters[a] + clusters[b]]
            dist = max(vals) - min(vals)
            ma = min(i for i, _ in clusters[a])
            mb = min(i for i, _ in clusters[b])
            key = (dist, min(ma, mb), max(ma, mb))
            if best is None or key < best[0]:
                best = (key, a, b)
        (dist, _, _), a, b = best
        if dist > t:
            break
        clusters[a] = clusters[a] + clusters[b]
        del clusters[b]
    return clusters


def wilcoxon_enumeration(diffs):
    """(statistic, two-sided p) by enumerating every sign assignment."""
    absd = [abs(d) for d in diffs]
    order = sorted(range(len(diffs)), key=lambda i: absd[i])
    ranks = [0.0] * len(diffs)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and absd[order[j + 1]] == absd[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j + 2) / 2
        i = j + 1
    nz = [r for r, d in zip(ranks, diffs) if d != 0]
    stat = sum(r for r, d in zip(ranks, diffs) if d > 0)
    if not nz:
        return 0.0, 1.0
    le = ge = 0
    for signs in itertools.product((0, 1), repeat=len(nz)):
        s = sum(r for r, sg in zip(nz, signs) if sg)
        le += s <= stat + 1e-9
        ge += s >= stat - 1e-9
    return stat, min(1.0, 2 * min(le, ge) / 2 ** len(nz))
