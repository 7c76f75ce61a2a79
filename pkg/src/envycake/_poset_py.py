"""Pure-Python poset closure on bitsets (fallback for the compiled kernel)."""
from __future__ import annotations


def closure(n: int, le_edges: list[int], lt_edges: list[int]):
    """Close weak (<=) and strict (<) relations given as per-element bitsets.

    ``le_edges[i]`` has bit j set when i <= j is known, ``lt_edges[i]`` when
    i < j. Returns ``(le, lt)`` closed bitsets (``le`` reflexive), or ``None``
    when some element ends up strictly below itself.
    """
    reach = [le_edges[i] | lt_edges[i] | (1 << i) for i in range(n)]
    for k in range(n):
        bit = 1 << k
        rk = reach[k]
        for i in range(n):
            if reach[i] & bit:
                reach[i] |= rk
    # one strict step from j, then anything weakly above
    step = [0] * n
    for j in range(n):
        acc, s = 0, lt_edges[j]
        while s:
            low = s & -s
            acc |= reach[low.bit_length() - 1]
            s ^= low
        step[j] = acc
    lt = [0] * n
    for i in range(n):
        acc, r = 0, reach[i]
        while r:
            low = r & -r
            acc |= step[low.bit_length() - 1]
            r ^= low
        if acc >> i & 1:
            return None
        lt[i] = acc
    return reach, lt


def add_edges(reach: list[int], lt: list[int], edges) -> bool:
    """Add ``(u, v, strict)`` edges to closed relations in place.

    Returns False as soon as some element becomes strictly below itself
    (the rows are then left partly updated).
    """
    for u, v, strict in edges:
        if (lt[u] if strict else reach[u]) >> v & 1:
            continue
        bu = 1 << u
        rv, sv = reach[v], lt[v]
        for x in range(len(reach)):
            if reach[x] & bu:
                reach[x] |= rv
                lt[x] |= rv if (strict or lt[x] & bu) else sv
                if lt[x] >> x & 1:
                    return False
    return True
