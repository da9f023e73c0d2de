"""Best-known AIG structures for every 4-input function.

The table is built once per process.  A formula-size dynamic program
(AND with free complements) enumerates every function up to nine gates;
the remaining functions, and any function that profits from it, are
finished by relaxing over Shannon (mux), variable-XOR and disjoint-support
AND/OR/XOR decompositions until no cost improves.  Costs are invariant
under input permutation, input negation and output negation, so the table
holds one structure per NPN class member without canonicalising at lookup
time.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

MASK = 0xFFFF
VARS = (0xAAAA, 0xCCCC, 0xF0F0, 0xFF00)
DP_LEVELS = 9

LEAF, AND, XOR, MUX = 0, 1, 2, 3


def _cofactor(f: np.ndarray, i: int, value: int) -> np.ndarray:
    m = VARS[i]
    s = 1 << i
    if value:
        hi = f & m
        return hi | (hi >> s)
    lo = f & (MASK ^ m)
    return lo | (lo << s)


class RewriteTable:
    def __init__(self):
        n = 1 << 16
        big = np.int32(1 << 20)
        cost = np.full(n, big, dtype=np.int32)
        op = np.zeros(n, dtype=np.uint8)
        arg_a = np.zeros(n, dtype=np.int32)
        arg_b = np.zeros(n, dtype=np.int32)
        arg_v = np.zeros(n, dtype=np.int32)

        leaves = [0, MASK] + list(VARS) + [v ^ MASK for v in VARS]
        cost[leaves] = 0
        levels = [np.array(sorted(set(leaves)), dtype=np.int32)]
        for k in range(1, DP_LEVELS + 1):
            found = []
            for i in range(k):
                j = k - 1 - i
                if i > j:
                    break
                left, right = levels[i], levels[j]
                res = (left[:, None] & right[None, :]).ravel()
                la = np.broadcast_to(left[:, None], (len(left), len(right))).ravel()
                rb = np.broadcast_to(right[None, :], (len(left), len(right))).ravel()
                for funcs in (res, res ^ MASK):
                    new = cost[funcs] > k
                    u, idx = np.unique(funcs[new], return_index=True)
                    cost[u] = k
                    op[u] = AND
                    arg_a[u] = la[new][idx]
                    arg_b[u] = rb[new][idx]
                    found.append(u)
            levels.append(np.unique(np.concatenate(found)).astype(np.int32) if found else
                          np.zeros(0, dtype=np.int32))

        funcs = np.arange(n, dtype=np.int32)
        cof = [(_cofactor(funcs, i, 0), _cofactor(funcs, i, 1)) for i in range(4)]
        parts = []
        for size in (1, 2):
            for a in combinations(range(4), size):
                b = tuple(v for v in range(4) if v not in a)
                if size == 2 and a > b:
                    continue
                parts.append((a, b))

        def exists(f, group):
            for v in group:
                f = _cofactor(f, v, 0) | _cofactor(f, v, 1)
            return f

        def fix_zero(f, group):
            for v in group:
                f = _cofactor(f, v, 0)
            return f

        nonconst = (funcs != 0) & (funcs != MASK)
        changed = True
        while changed:
            changed = False

            def relax(cand, mask, code, a, b, v):
                nonlocal changed
                better = mask & (cand < cost)
                if better.any():
                    changed = True
                    cost[better] = cand[better]
                    op[better] = code
                    arg_a[better] = a[better]
                    arg_b[better] = b[better]
                    arg_v[better] = v if np.isscalar(v) else v[better]

            for i in range(4):
                f0, f1 = cof[i]
                dep = f0 != f1
                relax(3 + cost[f0], dep & (f1 == (f0 ^ MASK)), XOR, f0, f0, i)
                relax(3 + cost[f0] + cost[f1], dep, MUX, f1, f0, i)
            for a, b in parts:
                # f = g(a-vars) & h(b-vars), and the complemented (OR) form
                for comp in (0, MASK):
                    f = funcs ^ comp
                    g = exists(f, b)
                    h = exists(f, a)
                    ok = nonconst & ((g & h) == f) & (g != MASK) & (h != MASK)
                    relax(1 + cost[g] + cost[h], ok, AND, g, h, 0)
                g = fix_zero(funcs, b)
                h = fix_zero(funcs, a) ^ np.where(funcs & 1, MASK, 0)
                ok = nonconst & ((g ^ h) == funcs) & (g != 0) & (g != MASK) & (h != 0) & (h != MASK)
                relax(3 + cost[g] + cost[h], ok, XOR, g, h, -1)

        assert int(cost.max()) < big, "rewrite table left functions unresolved"
        self.cost = cost.tolist()
        self.op = op.tolist()
        self.arg_a = arg_a.tolist()
        self.arg_b = arg_b.tolist()
        self.arg_v = arg_v.tolist()

    def build(self, f: int, leaves, and_fn, memo=None) -> int:
        """Instantiate the structure for ``f`` over four leaf literals."""
        if memo is None:
            memo = {}
        return self._build(f, leaves, and_fn, memo)

    def _build(self, f, leaves, and_fn, memo):
        if f in memo:
            return memo[f]
        if f == 0:
            return 0
        if f == MASK:
            return 1
        for i, v in enumerate(VARS):
            if f == v:
                return leaves[i]
            if f == v ^ MASK:
                return leaves[i] ^ 1
        code = self.op[f]
        a = self.arg_a[f]
        b = self.arg_b[f]
        if code == AND:
            lit = and_fn(self._build(a, leaves, and_fn, memo), self._build(b, leaves, and_fn, memo))
            if a & b != f:
                lit ^= 1
        elif code == MUX:
            x = leaves[self.arg_v[f]]
            hi = self._build(a, leaves, and_fn, memo)
            lo = self._build(b, leaves, and_fn, memo)
            lit = and_fn(and_fn(x, hi) ^ 1, and_fn(x ^ 1, lo) ^ 1) ^ 1
        elif code == XOR:
            v = self.arg_v[f]
            if v >= 0:
                x = leaves[v]
                g = self._build(a, leaves, and_fn, memo)
            else:
                x = self._build(a, leaves, and_fn, memo)
                g = self._build(b, leaves, and_fn, memo)
            lit = and_fn(and_fn(x, g ^ 1) ^ 1, and_fn(x ^ 1, g) ^ 1) ^ 1
        else:
            raise AssertionError(f"no structure recorded for {f:#06x}")
        memo[f] = lit
        return lit


@lru_cache(maxsize=1)
def rewrite_table() -> RewriteTable:
    return RewriteTable()
