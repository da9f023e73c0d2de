"""Whole-cone collapse into a shared Shannon decomposition.

The outputs of a small cone are collapsed to global truth tables and
re-expanded as a multi-output decision diagram with complemented edges:
every distinct cofactor (up to complement) becomes one mux.  The variable
order is chosen by sifting on diagram size, which rewards cofactors shared
between outputs and between the merged functions.
"""

from __future__ import annotations

from typing import Sequence

from ..boolfunc import full_mask, var_mask
from .aig import Aig


def _cof(g: int, v: int, value: int, n: int) -> int:
    m = var_mask(v, n)
    s = 1 << v
    if value:
        hi = g & m
        return hi | (hi >> s)
    lo = g & ~m
    return lo | (lo << s)


def diagram_size(outs: Sequence[int], order: Sequence[int], n: int) -> int:
    """Number of decision nodes for ``outs`` under the top-down variable ``order``."""
    full = full_mask(n)
    level = {o ^ full if o & 1 else o for o in outs}
    total = 0
    for v in order:
        m = var_mask(v, n)
        s = 1 << v
        nxt = set()
        for g in level:
            hi = g & m
            lo = g & ~m
            if hi >> s == lo:
                nxt.add(g)
                continue
            total += 1
            lo |= lo << s
            hi |= hi >> s
            nxt.add(lo ^ full if lo & 1 else lo)
            nxt.add(hi ^ full if hi & 1 else hi)
        level = nxt
    return total


def sift_order(outs: Sequence[int], n: int) -> tuple[int, list[int]]:
    """Greedy sifting: move each variable to its best position until no gain."""
    order = list(range(n))
    best = diagram_size(outs, order, n)
    improved = True
    while improved:
        improved = False
        for v in range(n):
            i = order.index(v)
            base = order[:i] + order[i + 1:]
            for j in range(n):
                if j == i:
                    continue
                cand = base[:j] + [v] + base[j:]
                size = diagram_size(outs, cand, n)
                if size < best:
                    best, order, improved = size, cand, True
    return best, order


def shannon_aig(outs: Sequence[int], n: int, order: Sequence[int]) -> Aig:
    full = full_mask(n)
    aig = Aig(n)
    memo = {0: 0}
    pos = {v: i for i, v in enumerate(order)}

    def build(g: int) -> int:
        c = g & 1
        if c:
            g ^= full
        hit = memo.get(g)
        if hit is not None:
            return hit ^ c
        top = min((v for v in order if _cof(g, v, 0, n) != _cof(g, v, 1, n)), key=pos.__getitem__)
        lo = build(_cof(g, top, 0, n))
        hi = build(_cof(g, top, 1, n))
        lit = aig.mux(aig.pi(top), hi, lo)
        memo[g] = lit
        return lit ^ c

    aig.outputs = [build(o) for o in outs]
    return aig


def collapse(aig: Aig) -> Aig:
    """Re-express every output through a sifted shared Shannon decomposition."""
    outs = aig.output_tables()
    _, order = sift_order(outs, aig.num_pis)
    return shannon_aig(outs, aig.num_pis, order)
