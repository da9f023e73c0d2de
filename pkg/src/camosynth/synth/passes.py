"""AIG optimisation passes: balance, rewrite, refactor and the fixed script.

rewrite and refactor pick non-overlapping replacements on a snapshot of
the graph (each candidate's maximum fanout-free cone is claimed once it is
accepted), then rebuild the graph with structural hashing.  Every pass
returns its input unchanged when the result would not be smaller, so node
count never grows.
"""

from __future__ import annotations

import heapq

from ..boolfunc import full_mask, var_mask
from .aig import Aig
from .collapse import collapse
from .table import MASK as MASK4, rewrite_table

CUTS_PER_NODE = 6
CUT_SIZE = 4
REFACTOR_LEAVES = 10
# a cut whose table structure exceeds its cone by more than this is not tried
SHARING_SLACK = 2


# balance

def balance(aig: Aig) -> Aig:
    """Rebuild AND supergates as level-balanced trees."""
    refs = aig.refs()
    f0, f1, npi = aig.fanin0, aig.fanin1, aig.num_pis
    new = Aig(npi)
    level = [0] * (npi + 1)
    memo = {i: i << 1 for i in range(npi + 1)}

    def lev(lit):
        return level[lit >> 1]

    def make_and(a, b):
        lit = new.and_(a, b)
        node = lit >> 1
        if node == len(level):
            x, y = level[a >> 1], level[b >> 1]
            level.append((x if x > y else y) + 1)
        return lit

    def bal(node):
        hit = memo.get(node)
        if hit is not None:
            return hit
        leaves = []
        stack = [f1[node], f0[node]]
        while stack:
            l = stack.pop()
            m = l >> 1
            if not l & 1 and m > npi and refs[m] == 1:
                stack.append(f1[m])
                stack.append(f0[m])
            else:
                leaves.append(l)
        lits = set()
        for l in leaves:
            lits.add(bal(l >> 1) ^ (l & 1))
        if 0 in lits or any(l ^ 1 in lits for l in lits):
            memo[node] = 0
            return 0
        lits.discard(1)
        heap = [(lev(l), l) for l in lits]
        heapq.heapify(heap)
        while len(heap) > 1:
            _, a = heapq.heappop(heap)
            _, b = heapq.heappop(heap)
            c = make_and(a, b)
            heapq.heappush(heap, (lev(c), c))
        result = heap[0][1] if heap else 1
        memo[node] = result
        return result

    new.outputs = [bal(l >> 1) ^ (l & 1) for l in aig.outputs]
    new = new.cleanup()
    if new.and_count() > aig.and_count() or new.depth() > aig.depth():
        return aig
    return new


# shared helpers for cut-based passes

def _mffc(aig: Aig, root: int, leaves, refs) -> list[int]:
    """Nodes freed if ``root`` is removed, bounded by ``leaves``."""
    f0, f1, npi = aig.fanin0, aig.fanin1, aig.num_pis
    out = [root]
    dec: dict[int, int] = {}
    stack = [root]
    while stack:
        m = stack.pop()
        for c in (f0[m] >> 1, f1[m] >> 1):
            if c <= npi or c in leaves:
                continue
            d = dec.get(c, 0) + 1
            dec[c] = d
            if d == refs[c]:
                out.append(c)
                stack.append(c)
    return out


class _DryRun:
    """Counts AND nodes a structure would add to ``aig`` without adding them.

    Existing nodes inside ``doomed`` (the cone being replaced) are counted
    as new, since they would otherwise be deleted.
    """

    __slots__ = ("aig", "doomed", "virtual", "count", "reused", "next_id")

    def __init__(self, aig: Aig, doomed):
        self.aig = aig
        self.doomed = doomed
        self.virtual: dict = {}
        self.count = 0
        self.reused: list[int] = []
        self.next_id = aig.num_nodes

    def and_(self, a: int, b: int) -> int:
        if a > b:
            a, b = b, a
        limit = self.aig.num_nodes << 1
        if a < limit and b < limit:
            lit = self.aig.lookup(a, b)
            if lit is not None:
                node = lit >> 1
                if node in self.doomed:
                    key = (a, b)
                    if key not in self.virtual:
                        self.virtual[key] = lit
                        self.count += 1
                elif node > self.aig.num_pis:
                    self.reused.append(node)
                return lit
        else:
            if a == 0 or a == b:
                return a
            if a == 1:
                return b
            if a ^ b == 1:
                return 0
        key = (a, b)
        lit = self.virtual.get(key)
        if lit is None:
            lit = self.next_id << 1
            self.next_id += 1
            self.virtual[key] = lit
            self.count += 1
        return lit


def _rebuild(aig: Aig, replacements: dict) -> Aig:
    """Copy ``aig`` substituting ``replacements[node] = (leaves, builder)``."""
    f0, f1, npi = aig.fanin0, aig.fanin1, aig.num_pis
    new = Aig(npi)
    lit_of = [i << 1 for i in range(npi + 1)] + [0] * (aig.num_nodes - npi - 1)
    live = aig.live_nodes()
    for n in range(npi + 1, aig.num_nodes):
        if not live[n]:
            continue
        rep = replacements.get(n)
        if rep is None:
            a, b = f0[n], f1[n]
            lit_of[n] = new.and_(lit_of[a >> 1] ^ (a & 1), lit_of[b >> 1] ^ (b & 1))
        else:
            leaves, builder = rep
            lit_of[n] = builder(new, [lit_of[l] for l in leaves])
    new.outputs = [lit_of[l >> 1] ^ (l & 1) for l in aig.outputs]
    return new.cleanup()


# rewrite

_expand_cache: dict = {}


def _expand(tt: int, pos: tuple[int, ...]) -> int:
    """Re-index a 4-variable table so that its variable i becomes variable pos[i]."""
    key = (tt, pos)
    hit = _expand_cache.get(key)
    if hit is not None:
        return hit
    out = 0
    for row in range(16):
        src = 0
        for i, p in enumerate(pos):
            src |= (row >> p & 1) << i
        out |= (tt >> src & 1) << row
    _expand_cache[key] = out
    return out


def enumerate_cuts(aig: Aig, k: int = CUT_SIZE, limit: int = CUTS_PER_NODE) -> list[list[tuple]]:
    """Priority k-feasible cuts per node as ``(leaf_bitset, leaves, table)``.

    ``table`` is the node's function over the sorted leaves as a 16-bit
    truth table (variables beyond the leaf count are unused).
    """
    f0, f1, npi = aig.fanin0, aig.fanin1, aig.num_pis
    cuts: list[list[tuple]] = [[(1 << n, (n,), 0xAAAA)] for n in range(npi + 1)]
    cuts[0] = [(0, (), 0)]
    for n in range(npi + 1, aig.num_nodes):
        a, b = f0[n], f1[n]
        ca = cuts[a >> 1]
        cb = cuts[b >> 1]
        found = []
        for xa in ca:
            for xb in cb:
                u = xa[0] | xb[0]
                size = u.bit_count()
                if size <= k:
                    found.append((size, u, xa, xb))
        found.sort(key=lambda t: (t[0], t[1]))
        kept: list[tuple] = []
        for size, u, xa, xb in found:
            if any(c[0] & u == c[0] for c in kept):
                continue
            leaves = tuple(_bits(u))
            index = {l: i for i, l in enumerate(leaves)}
            ta = _expand(xa[2], tuple(index[l] for l in xa[1]))
            tb = _expand(xb[2], tuple(index[l] for l in xb[1]))
            if a & 1:
                ta ^= MASK4
            if b & 1:
                tb ^= MASK4
            kept.append((u, leaves, ta & tb))
            if len(kept) >= limit:
                break
        kept.append((1 << n, (n,), 0xAAAA))
        cuts.append(kept)
    return cuts


def _bits(x: int) -> list[int]:
    out = []
    while x:
        low = x & -x
        out.append(low.bit_length() - 1)
        x ^= low
    return out


def _observed(tts, leaves, full) -> int:
    """Mask of leaf-value combinations that some primary-input pattern produces."""
    masks = [full]
    for l in leaves:
        t = tts[l]
        nt = full ^ t
        masks = [m & nt for m in masks] + [m & t for m in masks]
    seen = 0
    for i, m in enumerate(masks):
        if m:
            seen |= 1 << i
    return _spread(seen, len(leaves))


def _spread(f: int, k: int) -> int:
    # repeat a k-variable table over the unused upper variables
    width = 1 << k
    while width < 16:
        f |= f << width
        width <<= 1
    return f & MASK4


def rewrite(aig: Aig) -> Aig:
    """Replace 4-input cuts by the best-known structure of their function."""
    aig = aig.cleanup()
    table = rewrite_table()
    cost = table.cost
    npi = aig.num_pis
    refs = aig.refs()
    tts = aig.node_tables()
    full = full_mask(npi)
    cuts = enumerate_cuts(aig)
    claimed: set[int] = set()
    pinned: set[int] = set()
    replacements: dict = {}

    # functionally equivalent nodes collapse onto the first representative
    seen: dict[int, int] = {}
    for n in range(npi + 1, aig.num_nodes):
        t = tts[n]
        key = t if not t & 1 else t ^ full
        rep = seen.get(key)
        if rep is None:
            seen[key] = n
            continue
        mffc = _mffc(aig, n, (), refs)
        if rep in mffc or any(m in claimed or m in pinned for m in mffc):
            continue
        compl = 0 if tts[rep] == t else 1
        replacements[n] = ((rep,), lambda new, lits, c=compl: lits[0] ^ c)
        claimed.update(mffc)
        pinned.add(rep)

    for n in range(npi + 1, aig.num_nodes):
        if n in claimed or n in replacements:
            continue
        best = None
        best_gain = 0
        for _, leaves, f in cuts[n]:
            if leaves == (n,) or any(l in claimed for l in leaves):
                continue
            mffc = _mffc(aig, n, leaves, refs)
            size = len(mffc)
            if size < 2:
                continue
            # leaf combinations that never occur are free; try them at 0
            g = _observed(tts, leaves, full) & f
            if cost[g] < cost[f]:
                f = g
            fcost = cost[f]
            if size <= best_gain or fcost > size + SHARING_SLACK:
                continue
            if any(m in pinned for m in mffc):
                continue
            leaf_lits = [l << 1 for l in leaves] + [0] * (4 - len(leaves))
            dry = _DryRun(aig, set(mffc))
            table.build(f, leaf_lits, dry.and_)
            gain = size - dry.count
            if gain > best_gain:
                best_gain = gain
                best = (leaves, f, mffc, dry.reused)
        if best is not None:
            leaves, f, mffc, reused = best
            claimed.update(mffc)
            pinned.update(reused)

            def builder(new, lits, f=f):
                lits = lits + [0] * (4 - len(lits))
                return table.build(f, lits, new.and_)

            replacements[n] = (leaves, builder)

    if not replacements:
        return aig
    new = _rebuild(aig, replacements)
    return new if new.and_count() < aig.and_count() else aig


# refactor

def _reconv_cut(aig: Aig, root: int, max_leaves: int) -> list[int]:
    """Reconvergence-driven cut: grow the leaf set by the cheapest expansion."""
    f0, f1, npi = aig.fanin0, aig.fanin1, aig.num_pis
    visited = {root}
    leaves = {f0[root] >> 1, f1[root] >> 1}
    visited |= leaves
    while True:
        best = None
        best_cost = 3
        for l in leaves:
            if l <= npi:
                continue
            a, b = f0[l] >> 1, f1[l] >> 1
            cost = (a not in visited) + (b not in visited) - 1
            if cost < best_cost or (cost == best_cost and best is not None and l > best):
                best, best_cost = l, cost
        if best is None or len(leaves) + best_cost > max_leaves:
            break
        leaves.discard(best)
        for c in (f0[best] >> 1, f1[best] >> 1):
            if c not in visited:
                visited.add(c)
            leaves.add(c)
    return sorted(leaves)


def _cone_table(aig: Aig, root: int, leaves: list[int]) -> int:
    k = len(leaves)
    mask = full_mask(k)
    val = {l: var_mask(i, k) for i, l in enumerate(leaves)}
    f0, f1 = aig.fanin0, aig.fanin1
    cone = []
    stack = [root]
    seen = set(leaves)
    while stack:
        m = stack.pop()
        if m in seen:
            continue
        seen.add(m)
        cone.append(m)
        stack.append(f0[m] >> 1)
        stack.append(f1[m] >> 1)
    val[0] = 0
    for m in sorted(cone):
        a, b = f0[m], f1[m]
        ta = val[a >> 1] ^ mask if a & 1 else val[a >> 1]
        tb = val[b >> 1] ^ mask if b & 1 else val[b >> 1]
        val[m] = ta & tb
    return val[root]


def _cof(bits: int, v: int, value: int, k: int) -> int:
    m = var_mask(v, k)
    s = 1 << v
    if value:
        hi = bits & m
        return hi | (hi >> s)
    lo = bits & ~m & full_mask(k)
    return lo | (lo << s)


def isop(on: int, upper: int, k: int) -> tuple[list[tuple[int, int]], int]:
    """Irredundant SOP between ``on`` and ``upper`` (Minato-Morreale).

    Cubes are ``(positive_mask, negative_mask)`` over the k variables.
    """
    full = full_mask(k)
    memo: dict = {}

    def rec(lo, up, top):
        if lo == 0:
            return [], 0
        if up == full:
            return [(0, 0)], full
        key = (lo, up)
        hit = memo.get(key)
        if hit is not None:
            return hit
        v = top - 1
        while v >= 0 and _cof(lo, v, 0, k) == _cof(lo, v, 1, k) and _cof(up, v, 0, k) == _cof(up, v, 1, k):
            v -= 1
        lo0, lo1 = _cof(lo, v, 0, k), _cof(lo, v, 1, k)
        up0, up1 = _cof(up, v, 0, k), _cof(up, v, 1, k)
        c0, g0 = rec(lo0 & ~up1 & full, up0, v)
        c1, g1 = rec(lo1 & ~up0 & full, up1, v)
        rest = (lo0 & ~g0 | lo1 & ~g1) & full
        cs, gs = rec(rest, up0 & up1, v)
        x = var_mask(v, k)
        func = (g0 & ~x | g1 & x | gs) & full
        bit = 1 << v
        cubes = [(p, n | bit) for p, n in c0] + [(p | bit, n) for p, n in c1] + cs
        memo[key] = (cubes, func)
        return cubes, func

    return rec(on, upper, k)


def factor(cubes: list[tuple[int, int]], leaves: list[int], and_fn) -> int:
    """Build a literal-factored form of an SOP over the leaf literals."""
    if not cubes:
        return 0
    if any(p == 0 and n == 0 for p, n in cubes):
        return 1

    def cube_lit(p, n):
        lits = [leaves[v] for v in _bits(p)] + [leaves[v] ^ 1 for v in _bits(n)]
        return _and_all(lits, and_fn)

    if len(cubes) == 1:
        return cube_lit(*cubes[0])
    # common cube
    common_p = common_n = -1
    for p, n in cubes:
        common_p &= p
        common_n &= n
    if common_p or common_n:
        rest = [(p & ~common_p, n & ~common_n) for p, n in cubes]
        return and_fn(cube_lit(common_p, common_n), factor(rest, leaves, and_fn))
    counts: dict[tuple[int, int], int] = {}
    for p, n in cubes:
        for v in _bits(p):
            counts[(v, 1)] = counts.get((v, 1), 0) + 1
        for v in _bits(n):
            counts[(v, 0)] = counts.get((v, 0), 0) + 1
    (v, pol), best = max(counts.items(), key=lambda kv: (kv[1], -kv[0][0], kv[0][1]))
    if best < 2:
        return _or_all([cube_lit(p, n) for p, n in cubes], and_fn)
    bit = 1 << v
    if pol:
        with_lit = [(p & ~bit, n) for p, n in cubes if p & bit]
        without = [(p, n) for p, n in cubes if not p & bit]
        lit = leaves[v]
    else:
        with_lit = [(p, n & ~bit) for p, n in cubes if n & bit]
        without = [(p, n) for p, n in cubes if not n & bit]
        lit = leaves[v] ^ 1
    left = and_fn(lit, factor(with_lit, leaves, and_fn))
    if not without:
        return left
    right = factor(without, leaves, and_fn)
    return and_fn(left ^ 1, right ^ 1) ^ 1


def _and_all(lits, and_fn):
    lits = list(lits)
    if not lits:
        return 1
    while len(lits) > 1:
        nxt = [and_fn(lits[i], lits[i + 1]) for i in range(0, len(lits) - 1, 2)]
        if len(lits) % 2:
            nxt.append(lits[-1])
        lits = nxt
    return lits[0]


def _or_all(lits, and_fn):
    return _and_all([l ^ 1 for l in lits], and_fn) ^ 1


def refactor(aig: Aig, max_leaves: int = REFACTOR_LEAVES) -> Aig:
    """Collapse cones of up to ``max_leaves`` inputs to SOP and re-factor them."""
    aig = aig.cleanup()
    npi = aig.num_pis
    refs = aig.refs()
    claimed: set[int] = set()
    pinned: set[int] = set()
    replacements: dict = {}
    roots = sorted({l >> 1 for l in aig.outputs} |
                   {n for n in range(npi + 1, aig.num_nodes) if refs[n] > 1}, reverse=True)
    for n in roots:
        if n <= npi or n in claimed:
            continue
        leaves = _reconv_cut(aig, n, max_leaves)
        if any(l in claimed for l in leaves):
            continue
        mffc = _mffc(aig, n, set(leaves), refs)
        if len(mffc) < 2 or any(m in pinned for m in mffc):
            continue
        k = len(leaves)
        func = _cone_table(aig, n, leaves)
        full = full_mask(k)
        leaf_lits = [l << 1 for l in leaves]
        best = None
        for compl in (0, 1):
            target = func ^ full if compl else func
            cubes, _ = isop(target, target, k)
            dry = _DryRun(aig, set(mffc))
            factor(cubes, leaf_lits, dry.and_)
            gain = len(mffc) - dry.count
            if gain > 0 and (best is None or gain > best[0]):
                best = (gain, cubes, compl, dry.reused)
        if best is None:
            continue
        _, cubes, compl, reused = best
        claimed.update(mffc)
        pinned.update(reused)

        def builder(new, lits, cubes=cubes, compl=compl):
            return factor(cubes, lits, new.and_) ^ compl

        replacements[n] = (leaves, builder)
    best = aig
    if replacements:
        new = _rebuild(aig, replacements)
        if new.and_count() < best.and_count():
            best = new
    if npi <= max_leaves:
        # the whole circuit is itself a small cone
        whole = collapse(aig)
        if whole.and_count() < best.and_count():
            best = whole
    return best


SCRIPT = ("balance", "rewrite", "refactor", "balance", "rewrite", "rewrite", "balance")
PASSES = {"balance": balance, "rewrite": rewrite, "refactor": refactor}


def synth_script(aig: Aig, log: list | None = None, check=None) -> Aig:
    """Run the fixed pass schedule; ``check(before, after, name)`` is called after each pass."""
    if log is not None:
        log.append(("input", aig.and_count(), aig.depth()))
    for name in SCRIPT:
        new = PASSES[name](aig)
        if check is not None:
            check(aig, new, name)
        aig = new
        if log is not None:
            log.append((name, aig.and_count(), aig.depth()))
    return aig
