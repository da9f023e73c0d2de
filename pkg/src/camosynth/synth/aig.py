"""And-inverter graphs.

Literals are ``2 * node + complement``.  Node 0 is constant false (so
literal 1 is constant true), nodes ``1..num_pis`` are primary inputs, and
AND nodes follow in creation order, which is always topological.
"""

from __future__ import annotations

from typing import Sequence

from ..boolfunc import full_mask, var_mask
from ..netlist import Netlist

FALSE = 0
TRUE = 1


def lit_not(lit: int) -> int:
    return lit ^ 1


class Aig:
    def __init__(self, num_pis: int):
        self.num_pis = num_pis
        self.fanin0 = [0] * (num_pis + 1)
        self.fanin1 = [0] * (num_pis + 1)
        self.strash: dict[int, int] = {}
        self.outputs: list[int] = []

    def pi(self, i: int) -> int:
        return (i + 1) << 1

    def is_and(self, node: int) -> bool:
        return node > self.num_pis

    @property
    def num_nodes(self) -> int:
        return len(self.fanin0)

    def lookup(self, a: int, b: int):
        """Literal of AND(a, b) if it already exists or is trivial, else None."""
        if a > b:
            a, b = b, a
        if a == 0:
            return 0
        if a == 1:
            return b
        if a == b:
            return a
        if a ^ b == 1:
            return 0
        node = self.strash.get(a << 32 | b)
        return None if node is None else node << 1

    def and_(self, a: int, b: int) -> int:
        if a > b:
            a, b = b, a
        if a == 0:
            return 0
        if a == 1:
            return b
        if a == b:
            return a
        if a ^ b == 1:
            return 0
        key = a << 32 | b
        node = self.strash.get(key)
        if node is None:
            node = len(self.fanin0)
            self.fanin0.append(a)
            self.fanin1.append(b)
            self.strash[key] = node
        return node << 1

    def or_(self, a: int, b: int) -> int:
        return self.and_(a ^ 1, b ^ 1) ^ 1

    def mux(self, sel: int, hi: int, lo: int) -> int:
        return self.or_(self.and_(sel, hi), self.and_(sel ^ 1, lo))

    def xor(self, a: int, b: int) -> int:
        return self.or_(self.and_(a, b ^ 1), self.and_(a ^ 1, b))

    def and_many(self, lits: Sequence[int]) -> int:
        lits = list(lits)
        if not lits:
            return TRUE
        while len(lits) > 1:
            nxt = [self.and_(lits[i], lits[i + 1]) for i in range(0, len(lits) - 1, 2)]
            if len(lits) % 2:
                nxt.append(lits[-1])
            lits = nxt
        return lits[0]

    def or_many(self, lits: Sequence[int]) -> int:
        return self.and_many([l ^ 1 for l in lits]) ^ 1

    # analysis helpers

    def live_nodes(self) -> list[bool]:
        live = [False] * self.num_nodes
        stack = [lit >> 1 for lit in self.outputs]
        f0, f1, npi = self.fanin0, self.fanin1, self.num_pis
        while stack:
            n = stack.pop()
            if live[n]:
                continue
            live[n] = True
            if n > npi:
                stack.append(f0[n] >> 1)
                stack.append(f1[n] >> 1)
        return live

    def and_count(self) -> int:
        live = self.live_nodes()
        return sum(live[self.num_pis + 1:])

    def levels(self) -> list[int]:
        lev = [0] * self.num_nodes
        f0, f1 = self.fanin0, self.fanin1
        for n in range(self.num_pis + 1, self.num_nodes):
            a = lev[f0[n] >> 1]
            b = lev[f1[n] >> 1]
            lev[n] = (a if a > b else b) + 1
        return lev

    def depth(self) -> int:
        lev = self.levels()
        return max((lev[lit >> 1] for lit in self.outputs), default=0)

    def refs(self) -> list[int]:
        """Fanout counts of live nodes (output references included)."""
        live = self.live_nodes()
        refs = [0] * self.num_nodes
        f0, f1 = self.fanin0, self.fanin1
        for n in range(self.num_pis + 1, self.num_nodes):
            if live[n]:
                refs[f0[n] >> 1] += 1
                refs[f1[n] >> 1] += 1
        for lit in self.outputs:
            refs[lit >> 1] += 1
        return refs

    def node_tables(self, num_vars: int | None = None) -> list[int]:
        """Exhaustive global truth table of every node (PI i is variable i)."""
        nv = self.num_pis if num_vars is None else num_vars
        mask = full_mask(nv)
        tts = [0] * self.num_nodes
        for i in range(self.num_pis):
            tts[i + 1] = var_mask(i, nv)
        f0, f1 = self.fanin0, self.fanin1
        for n in range(self.num_pis + 1, self.num_nodes):
            a = f0[n]
            b = f1[n]
            ta = tts[a >> 1] ^ mask if a & 1 else tts[a >> 1]
            tb = tts[b >> 1] ^ mask if b & 1 else tts[b >> 1]
            tts[n] = ta & tb
        return tts

    def output_tables(self) -> list[int]:
        tts = self.node_tables()
        mask = full_mask(self.num_pis)
        return [tts[l >> 1] ^ mask if l & 1 else tts[l >> 1] for l in self.outputs]

    def cleanup(self) -> "Aig":
        """Copy keeping only nodes reachable from the outputs."""
        live = self.live_nodes()
        new = Aig(self.num_pis)
        remap = [i << 1 for i in range(self.num_pis + 1)] + [0] * (self.num_nodes - self.num_pis - 1)
        f0, f1 = self.fanin0, self.fanin1
        for n in range(self.num_pis + 1, self.num_nodes):
            if live[n]:
                a = f0[n]
                b = f1[n]
                remap[n] = new.and_(remap[a >> 1] ^ (a & 1), remap[b >> 1] ^ (b & 1))
        new.outputs = [remap[l >> 1] ^ (l & 1) for l in self.outputs]
        return new

    def copy(self) -> "Aig":
        new = Aig(self.num_pis)
        new.fanin0 = list(self.fanin0)
        new.fanin1 = list(self.fanin1)
        new.strash = dict(self.strash)
        new.outputs = list(self.outputs)
        return new

    def structure(self) -> tuple:
        """Hashable structural signature (for determinism checks)."""
        return (self.num_pis, tuple(self.fanin0), tuple(self.fanin1), tuple(self.outputs))


def netlist_to_aig(n: Netlist) -> Aig:
    """Structurally hashed AIG; PIs are the data inputs followed by the selects."""
    aig = Aig(n.num_inputs)
    lits = [aig.pi(i) for i in range(n.num_inputs)]
    for g in n.gates:
        ins = [lits[f] for f in g.fanins]
        k = g.kind
        if k == "BUF":
            out = ins[0]
        elif k == "INV":
            out = ins[0] ^ 1
        elif k == "MUX2":
            d0, d1, s = ins
            out = aig.mux(s, d1, d0)
        elif k == "AND":
            out = aig.and_many(ins)
        elif k == "NAND":
            out = aig.and_many(ins) ^ 1
        elif k == "OR":
            out = aig.or_many(ins)
        elif k == "NOR":
            out = aig.or_many(ins) ^ 1
        else:
            raise ValueError(f"unsupported gate kind {k}")
        lits.append(out)
    aig.outputs = [lits[d] for d in n.drivers]
    return aig
