"""Cover an AIG with the library's base gates (INV, BUF, AND/NAND/OR/NOR 2-4).

Each AND node is matched against the AND-supergates of up to four leaves
rooted at it.  A supergate can be realised as AND or NAND over its leaves as
given, or as NOR or OR over the inverted leaves, so the dynamic program runs
over (node, polarity) pairs with inverters absorbed wherever a gate of the
other family is cheaper.  Leaf costs are divided by fanout (area flow) so
shared logic is not paid for twice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from ..celllib import CellLibrary, default_library
from ..netlist import Netlist, NetlistBuilder
from .aig import Aig

MAX_LEAVES = 4


@dataclass
class SynthReport:
    area_ge: Fraction
    gate_count: dict[str, int]
    passes: list = field(default_factory=list)

    def to_text(self) -> str:
        lines = [f"area_ge = {float(self.area_ge):.2f}"]
        lines += [f"gates.{name} = {count}" for name, count in sorted(self.gate_count.items())]
        lines += [f"pass.{i}.{name} = {nodes} nodes, depth {depth}"
                  for i, (name, nodes, depth) in enumerate(self.passes)]
        return "\n".join(lines) + "\n"


def _supergates(aig: Aig, node: int, refs: list[int]) -> list[tuple[int, ...]]:
    """Leaf-literal sets of the AND trees rooted at ``node`` with at most 4 leaves."""
    f0, f1, npi = aig.fanin0, aig.fanin1, aig.num_pis
    start = tuple(sorted((f0[node], f1[node])))
    seen = {start}
    todo = [start]
    while todo:
        leaves = todo.pop()
        for i, l in enumerate(leaves):
            m = l >> 1
            if l & 1 or m <= npi or refs[m] != 1:
                continue
            rest = leaves[:i] + leaves[i + 1:]
            grown = tuple(sorted(set(rest) | {f0[m], f1[m]}))
            if len(grown) > MAX_LEAVES or grown in seen:
                continue
            if any(x ^ 1 in grown for x in grown):
                continue
            seen.add(grown)
            todo.append(grown)
    return sorted(seen, key=lambda s: (len(s), s))


def aig_to_gates(aig: Aig, lib: Optional[CellLibrary] = None,
                 data_names: Optional[Sequence[str]] = None,
                 select_names: Sequence[str] = (),
                 output_names: Optional[Sequence[str]] = None) -> tuple[Netlist, SynthReport]:
    """Map ``aig`` onto library gates; PIs are the data names then the select names."""
    lib = lib or default_library()
    aig = aig.cleanup()
    npi = aig.num_pis
    if data_names is None:
        data_names = [f"x{i}" for i in range(npi - len(select_names))]
    if len(data_names) + len(select_names) != npi:
        raise ValueError("input names do not cover the AIG's primary inputs")
    if output_names is None:
        output_names = [f"y{j}" for j in range(len(aig.outputs))]

    area = {}
    for kind in ("AND", "NAND", "OR", "NOR"):
        for k in range(2, MAX_LEAVES + 1):
            area[kind, k] = float(lib.gate_cell(kind, k).area_ge)
    inv = float(lib.gate_cell("INV", 1).area_ge)

    refs = aig.refs()
    n_nodes = aig.num_nodes
    cost = [[0.0, inv] for _ in range(n_nodes)]
    choice: list[list] = [[None, ("INV",)] for _ in range(n_nodes)]
    live = aig.live_nodes()
    for n in range(npi + 1, n_nodes):
        if not live[n]:
            continue
        best = [float("inf"), float("inf")]
        pick: list = [None, None]
        for leaves in _supergates(aig, n, refs):
            k = len(leaves)
            flow_as_is = 0.0
            flow_inv = 0.0
            for l in leaves:
                m, c = l >> 1, l & 1
                share = refs[m] if refs[m] > 1 else 1
                flow_as_is += cost[m][c] / share
                flow_inv += cost[m][c ^ 1] / share
            options = (
                (0, area["AND", k] + flow_as_is, "AND", 0),
                (1, area["NAND", k] + flow_as_is, "NAND", 0),
                (0, area["NOR", k] + flow_inv, "NOR", 1),
                (1, area["OR", k] + flow_inv, "OR", 1),
            )
            for pol, c, kind, flip in options:
                if c < best[pol] - 1e-9:
                    best[pol] = c
                    pick[pol] = (kind, leaves, flip)
        for pol in (0, 1):
            if best[pol ^ 1] + inv < best[pol] - 1e-9:
                best[pol] = best[pol ^ 1] + inv
                pick[pol] = ("INV",)
        cost[n] = best
        choice[n] = pick

    b = NetlistBuilder(data_names, select_names)
    signal: dict[tuple[int, int], int] = {}

    def wire(m: int, p: int) -> int:
        key = (m, p)
        hit = signal.get(key)
        if hit is not None:
            return hit
        if m <= npi and p == 0:
            w = m - 1
        else:
            ch = choice[m][p]
            if ch[0] == "INV":
                w = b.add("INV", wire(m, p ^ 1))
            else:
                kind, leaves, flip = ch
                w = b.add(kind, *[wire(l >> 1, (l & 1) ^ flip) for l in leaves])
        signal[key] = w
        return w

    for name, lit in zip(output_names, aig.outputs):
        m, p = lit >> 1, lit & 1
        if m == 0:
            if not npi:
                raise ValueError("constant output in an AIG without inputs")
            # constant from x AND NOT x, or its NAND for constant 1
            w = b.add("NAND" if p else "AND", 0, wire(1, 1))
        elif m <= npi and p == 0:
            w = b.add("BUF", m - 1)
        else:
            w = wire(m, p)
        b.output(name, w)
    net = b.build()
    counts: dict[str, int] = {}
    for g in net.gates:
        counts[g.type_name] = counts.get(g.type_name, 0) + 1
    return net, SynthReport(net.area(lib), counts)
