# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled poset closure on multi-word bitsets; same contract as _poset_py."""
from libc.stdint cimport uint64_t
from libc.stdlib cimport calloc, free

ONE = 1  # a Python int, so shifts past 63 bits stay exact


cdef inline void _to_words(object x, uint64_t* out, int w):
    cdef int i
    for i in range(w):
        out[i] = <uint64_t>(x & 0xFFFFFFFFFFFFFFFF)
        x >>= 64


cdef inline object _from_words(uint64_t* src, int w):
    cdef int i
    v = 0
    for i in range(w - 1, -1, -1):
        v = (v << 64) | src[i]
    return v


cdef inline bint _has(uint64_t* row, int j):
    return (row[j >> 6] >> (j & 63)) & 1


cdef inline void _or_into(uint64_t* dst, uint64_t* src, int w):
    cdef int q
    for q in range(w):
        dst[q] |= src[q]


def closure(int n, list le_edges, list lt_edges):
    cdef int w = (n + 63) // 64 if n > 0 else 1
    cdef size_t size = <size_t>(n * w + 1)
    cdef uint64_t* reach = <uint64_t*>calloc(size, sizeof(uint64_t))
    cdef uint64_t* lt0 = <uint64_t*>calloc(size, sizeof(uint64_t))
    cdef uint64_t* step = <uint64_t*>calloc(size, sizeof(uint64_t))
    cdef uint64_t* strict = <uint64_t*>calloc(size, sizeof(uint64_t))
    cdef int i, j, k
    if reach == NULL or lt0 == NULL or step == NULL or strict == NULL:
        free(reach); free(lt0); free(step); free(strict)
        raise MemoryError()
    try:
        for i in range(n):
            _to_words(le_edges[i] | lt_edges[i] | (ONE << i), reach + i * w, w)
            _to_words(lt_edges[i], lt0 + i * w, w)
        for k in range(n):
            for i in range(n):
                if _has(reach + i * w, k):
                    _or_into(reach + i * w, reach + k * w, w)
        # one strict step from j, then anything weakly above
        for j in range(n):
            for k in range(n):
                if _has(lt0 + j * w, k):
                    _or_into(step + j * w, reach + k * w, w)
        for i in range(n):
            for j in range(n):
                if _has(reach + i * w, j):
                    _or_into(strict + i * w, step + j * w, w)
            if _has(strict + i * w, i):
                return None
        return ([_from_words(reach + i * w, w) for i in range(n)],
                [_from_words(strict + i * w, w) for i in range(n)])
    finally:
        free(reach)
        free(lt0)
        free(step)
        free(strict)


def add_edges(list reach, list lt, list edges):
    cdef int n = len(reach)
    cdef int w = (n + 63) // 64 if n > 0 else 1
    cdef size_t size = <size_t>(n * w + 1)
    cdef uint64_t* r = <uint64_t*>calloc(size, sizeof(uint64_t))
    cdef uint64_t* s = <uint64_t*>calloc(size, sizeof(uint64_t))
    cdef int i, x, q, u, v
    cdef bint strict, ok = True
    cdef uint64_t* rv
    cdef uint64_t* sv
    if r == NULL or s == NULL:
        free(r); free(s)
        raise MemoryError()
    try:
        for i in range(n):
            _to_words(reach[i], r + i * w, w)
            _to_words(lt[i], s + i * w, w)
        for u, v, strict in edges:
            if _has((s if strict else r) + u * w, v):
                continue
            rv = r + v * w
            sv = s + v * w
            for x in range(n):
                if not _has(r + x * w, u):
                    continue
                if strict or _has(s + x * w, u):
                    _or_into(s + x * w, rv, w)
                else:
                    _or_into(s + x * w, sv, w)
                _or_into(r + x * w, rv, w)
                if _has(s + x * w, x):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            for i in range(n):
                reach[i] = _from_words(r + i * w, w)
                lt[i] = _from_words(s + i * w, w)
        return ok
    finally:
        free(r)
        free(s)
