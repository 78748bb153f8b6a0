# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see ``_pykernels`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt
from libc.stdlib cimport free, malloc

cnp.import_array()

BACKEND = "cython"


ctypedef struct Cand:
    double span
    long long ma
    long long mb
    Py_ssize_t a
    Py_ssize_t b
    long long va
    long long vb


cdef inline bint _less(Cand* x, Cand* y) noexcept nogil:
    if x.span != y.span:
        return x.span < y.span
    if x.ma != y.ma:
        return x.ma < y.ma
    if x.mb != y.mb:
        return x.mb < y.mb
    if x.a != y.a:
        return x.a < y.a
    if x.b != y.b:
        return x.b < y.b
    if x.va != y.va:
        return x.va < y.va
    return x.vb < y.vb


cdef void _push(Cand* heap, Py_ssize_t* size, Cand item) noexcept nogil:
    cdef Py_ssize_t i = size[0], parent
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if not _less(&item, &heap[parent]):
            break
        heap[i] = heap[parent]
        i = parent
    heap[i] = item


cdef Cand _pop(Cand* heap, Py_ssize_t* size) noexcept nogil:
    cdef Cand top = heap[0]
    cdef Cand last
    cdef Py_ssize_t i = 0, child, n
    size[0] -= 1
    n = size[0]
    if n == 0:
        return top
    last = heap[n]
    while True:
        child = 2 * i + 1
        if child >= n:
            break
        if child + 1 < n and _less(&heap[child + 1], &heap[child]):
            child += 1
        if not _less(&heap[child], &last):
            break
        heap[i] = heap[child]
        i = child
    heap[i] = last
    return top


cdef inline Cand _cand(Py_ssize_t a, Py_ssize_t b, double* vals, Py_ssize_t* lo, Py_ssize_t* hi,
                       long long* minid, long long* version) noexcept nogil:
    cdef Cand c
    c.span = vals[hi[b]] - vals[lo[a]]
    c.ma = minid[a]
    c.mb = minid[b]
    if c.ma > c.mb:
        c.ma, c.mb = c.mb, c.ma
    c.a = a
    c.b = b
    c.va = version[a]
    c.vb = version[b]
    return c


def hac_sorted(values, ids, double threshold):
    cdef double[::1] vals = np.ascontiguousarray(values, dtype=np.float64)
    cdef cnp.int64_t[::1] idv = np.ascontiguousarray(ids, dtype=np.int64)
    cdef Py_ssize_t n = vals.shape[0]
    labels_arr = np.zeros(n, dtype=np.int64)
    if n <= 1:
        return labels_arr
    cdef cnp.int64_t[::1] labels = labels_arr
    cdef Py_ssize_t* lo = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    cdef Py_ssize_t* hi = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    cdef Py_ssize_t* nxt = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    cdef Py_ssize_t* prv = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    cdef long long* minid = <long long*> malloc(n * sizeof(long long))
    cdef long long* version = <long long*> malloc(n * sizeof(long long))
    cdef bint* alive = <bint*> malloc(n * sizeof(bint))
    # n - 1 initial candidates plus at most two per merge
    cdef Cand* heap = <Cand*> malloc(3 * n * sizeof(Cand))
    if not (lo and hi and nxt and prv and minid and version and alive and heap):
        free(lo); free(hi); free(nxt); free(prv); free(minid); free(version); free(alive); free(heap)
        raise MemoryError()
    cdef Py_ssize_t size = 0, a, b, c, p, i
    cdef Cand top
    cdef long long label
    with nogil:
        for i in range(n):
            lo[i] = i
            hi[i] = i
            nxt[i] = i + 1
            prv[i] = i - 1
            minid[i] = idv[i]
            version[i] = 0
            alive[i] = True
        nxt[n - 1] = -1
        for a in range(n - 1):
            _push(heap, &size, _cand(a, a + 1, &vals[0], lo, hi, minid, version))
        while size > 0:
            top = _pop(heap, &size)
            a = top.a
            b = top.b
            if not (alive[a] and alive[b]) or version[a] != top.va or version[b] != top.vb:
                continue
            if top.span > threshold:
                break
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
                _push(heap, &size, _cand(p, a, &vals[0], lo, hi, minid, version))
            if c != -1:
                _push(heap, &size, _cand(a, c, &vals[0], lo, hi, minid, version))
        label = -1
        a = 0
        while a != -1:
            label += 1
            for i in range(lo[a], hi[a] + 1):
                labels[i] = label
            a = nxt[a]
    free(lo); free(hi); free(nxt); free(prv); free(minid); free(version); free(alive); free(heap)
    return labels_arr


cdef double _std(double[::1] v) noexcept nogil:
    cdef Py_ssize_t n = v.shape[0], i
    cdef double total = 0.0, mean, sq = 0.0, d
    for i in range(n):
        total += v[i]
    mean = total / n
    for i in range(n):
        d = v[i] - mean
        sq += d * d
    return sqrt(sq / n)


def uncorrected_std(values):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    return _std(v)


def cluster_sorted(values, ids, int aggregate=0):
    cdef double[::1] vals = np.ascontiguousarray(values, dtype=np.float64)
    cdef cnp.int64_t[::1] idv = np.ascontiguousarray(ids, dtype=np.int64)
    cdef Py_ssize_t n = vals.shape[0]
    cdef double t = _std(vals)
    labels_arr = hac_sorted(values, ids, t)
    cdef cnp.int64_t[::1] labels = labels_arr
    cdef Py_ssize_t nc = labels[n - 1] + 1
    agg_arr = np.empty(nc, dtype=np.float64)
    top_arr = np.empty(nc, dtype=np.float64)
    mid_arr = np.empty(nc, dtype=np.int64)
    cdef double[::1] agg = agg_arr
    cdef double[::1] top = top_arr
    cdef cnp.int64_t[::1] mid = mid_arr
    cdef Py_ssize_t start = 0, end, c, i, j, key
    cdef double total
    cdef cnp.int64_t m
    for end in range(1, n + 1):
        if end == n or labels[end] != labels[start]:
            c = labels[start]
            if aggregate == 0:
                total = 0.0
                for i in range(start, end):
                    total += vals[i]
                agg[c] = total / (end - start)
            else:
                agg[c] = vals[end - 1]
            top[c] = vals[end - 1]
            m = idv[start]
            for i in range(start + 1, end):
                if idv[i] < m:
                    m = idv[i]
            mid[c] = m
            start = end
    # stable lexsort by (agg desc, top desc, min id asc); negation is exact
    order_arr = np.lexsort((mid_arr, -top_arr, -agg_arr)).astype(np.int64)
    cdef cnp.int64_t[::1] order = order_arr
    rank_arr = np.empty(nc, dtype=np.int64)
    cdef cnp.int64_t[::1] rank = rank_arr
    for i in range(nc):
        rank[order[i]] = i
    return t, labels_arr, rank_arr
