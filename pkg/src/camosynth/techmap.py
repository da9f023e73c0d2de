"""Camouflage-aware technology mapping by tree covering.

Select inputs, and every net whose value depends on the selects alone, are
abstracted away: a candidate subtree is described by the function it
computes over its remaining leaves for each select code (its absfunc
table), and a cell may cover it only if the cell's plausible set contains
every function in that table.  The chosen cell's configuration for each
viable function is recorded in a certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Optional, Sequence

from .boolfunc import depends_on, full_mask, var_mask
from .celllib import CamoCell, CellLibrary, default_library, spread_bits
from .merge import MergedSpec, PinAssignment
from .netlist import Gate, Netlist, eval_gate, exhaustive_words, simulate_words


@dataclass(frozen=True)
class Tree:
    root: int
    gates: tuple[int, ...]  # wires of the tree's gates, topological order, root last
    leaves: tuple[int, ...]


@dataclass(frozen=True)
class RequiredFunctions:
    """absfunc of a subtree: its function over ``vars`` for every select code."""

    vars: tuple[int, ...]
    table: dict

    def range(self) -> frozenset[int]:
        return frozenset(self.table.values())


@dataclass(frozen=True)
class Instance:
    cell: str
    fanins: tuple[int, ...]  # one driver wire per cell pin
    pin_map: tuple[int, ...]  # cell pin of each active variable


@dataclass(frozen=True)
class MappedNetlist:
    """Camouflaged instances over the data inputs; wire ``num_data + j`` is instance ``j``."""

    data_inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    instances: tuple[Instance, ...]
    drivers: tuple[int, ...]

    @property
    def num_data(self) -> int:
        return len(self.data_inputs)

    def area(self, lib: CellLibrary) -> Fraction:
        return sum((lib[i.cell].area_ge for i in self.instances), Fraction(0))

    def to_netlist(self, lib: CellLibrary) -> Netlist:
        """The attacker-visible view: every instance shown as its nominal gate."""
        gates = []
        for inst in self.instances:
            cell = lib[inst.cell]
            kind = inst.cell.rstrip("0123456789")
            if cell.arity != len(inst.fanins):
                raise ValueError(f"instance of {inst.cell} has {len(inst.fanins)} fanins")
            gates.append(Gate(kind, inst.fanins))
        return Netlist(self.data_inputs, (), self.outputs, tuple(gates), self.drivers)

    @classmethod
    def from_netlist(cls, n: Netlist) -> "MappedNetlist":
        if n.num_selects:
            raise ValueError("a mapped netlist has no select inputs")
        insts = []
        for g in n.gates:
            if g.kind == "MUX2":
                raise ValueError("MUX2 is not a library cell")
            insts.append(Instance(g.type_name, g.fanins, ()))
        return cls(n.data_inputs, n.outputs, tuple(insts), n.drivers)


@dataclass(frozen=True)
class PlausibilityCertificate:
    """Configuration of every instance under which the circuit realises one viable function."""

    code: int
    configs: tuple[int, ...]  # plausible-set index per instance


@dataclass(frozen=True)
class Choice:
    cost: Fraction
    cell: CamoCell
    pin_map: tuple[int, ...]
    leaves: tuple[int, ...]  # non-select leaf wires, variable order
    internal: tuple[int, ...]  # tree gates absorbed by this match
    table: dict


# select abstraction

def select_values(n: Netlist) -> list[Optional[tuple[int, ...]]]:
    """Per wire: its value under each select code if it ignores the data inputs, else None."""
    total = n.num_inputs
    words = simulate_words(n, exhaustive_words(total), full_mask(total))
    out: list[Optional[tuple[int, ...]]] = []
    d = n.num_data
    for w in words:
        if any(depends_on(w, i, total) for i in range(d)):
            out.append(None)
        else:
            out.append(tuple(w >> (code << d) & 1 for code in range(1 << n.num_selects)))
    return out


def _with_select_buffers(n: Netlist) -> Netlist:
    """Give every output driven straight by a select input its own BUF."""
    if not any(n.is_select(d) for d in n.drivers):
        return n
    gates = list(n.gates)
    drivers = list(n.drivers)
    for j, d in enumerate(drivers):
        if n.is_select(d):
            gates.append(Gate("BUF", (d,)))
            drivers[j] = n.num_inputs + len(gates) - 1
    return Netlist(n.data_inputs, n.select_inputs, n.outputs, tuple(gates), tuple(drivers))


# trees

def split_into_trees(n: Netlist) -> list[Tree]:
    """Split at multi-fanout nets and output drivers; ordered by root wire."""
    fanout = n.fanout_counts()
    po = set(n.drivers)
    base = n.num_inputs
    roots = [w for w in range(base, n.num_wires) if fanout[w] != 1 or w in po]
    is_root = set(roots)
    trees = []
    for r in roots:
        gates = []
        leaves = []
        stack = [r]
        while stack:
            w = stack.pop()
            if w >= base and (w == r or w not in is_root):
                gates.append(w)
                stack.extend(reversed(n.gate_of(w).fanins))
            else:
                leaves.append(w)
        trees.append(Tree(r, tuple(sorted(gates)), tuple(dict.fromkeys(leaves))))
    return trees


def absfunc(n: Netlist, wires: Iterable[int], root: int, leaves: Sequence[int],
            sel_values: Sequence[Optional[tuple[int, ...]]],
            codes: Optional[Sequence[int]] = None) -> RequiredFunctions:
    """Function of the subtree (gate ``wires``, output ``root``) for each select code.

    Leaves with a value in ``sel_values`` are select leaves; the others
    become variables in order of first appearance.
    """
    if codes is None:
        codes = range(1 << n.num_selects)
    var_leaves = tuple(dict.fromkeys(l for l in leaves if sel_values[l] is None))
    k = len(var_leaves)
    if k > 4:
        raise ValueError(f"subtree has {k} non-select leaves; at most 4 are allowed")
    mask = full_mask(k)
    order = sorted(wires)
    table = {}
    for code in codes:
        val = {l: var_mask(i, k) for i, l in enumerate(var_leaves)}
        for l in leaves:
            sv = sel_values[l]
            if sv is not None:
                val[l] = mask if sv[code] else 0
        for w in order:
            g = n.gate_of(w)
            val[w] = eval_gate(g.kind, [val[f] for f in g.fanins], mask)
        table[code] = val[root]
    return RequiredFunctions(var_leaves, table)


def _candidates(n: Netlist, w: int, internal: set, sel_values) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Depth-1 and depth-2 subtrees rooted at ``w`` as (gate wires, leaf wires)."""
    fanins = n.gate_of(w).fanins
    expandable = [i for i, f in enumerate(fanins) if f in internal and sel_values[f] is None]
    out = []
    for pick in product((0, 1), repeat=len(expandable)):
        chosen = {expandable[i] for i, bit in enumerate(pick) if bit}
        gates = [w]
        leaves = []
        for i, f in enumerate(fanins):
            if i in chosen:
                gates.append(f)
                leaves.extend(n.gate_of(f).fanins)
            else:
                leaves.append(f)
        out.append((tuple(gates), tuple(leaves)))
    return out


def tree_cover(n: Netlist, tree: Tree, lib: CellLibrary, sel_values, codes,
               cover: Optional[dict] = None) -> dict[int, Choice]:
    """Minimum-area cover of one tree; returns the best match for each tree gate."""
    if cover is None:
        cover = {}
    internal = set(tree.gates) - {tree.root}
    for w in tree.gates:
        best: Optional[Choice] = None
        best_key = None
        for gates, leaves in _candidates(n, w, internal, sel_values):
            var_leaves = tuple(dict.fromkeys(l for l in leaves if sel_values[l] is None))
            if len(var_leaves) > 4:
                continue
            req = absfunc(n, gates, w, leaves, sel_values, codes)
            hit = lib.match(req.range(), len(var_leaves))
            if hit is None:
                continue
            cell, pin_map = hit
            cost = cell.area_ge
            for l in var_leaves:
                if l in internal:
                    cost += cover[l].cost
            key = (cost, len(var_leaves), cell.name)
            if best_key is None or key < best_key:
                best_key = key
                best = Choice(cost, cell, pin_map, var_leaves, tuple(sorted(gates)), req.table)
        if best is None:
            raise AssertionError(f"no camouflaged cell covers gate {w}")
        cover[w] = best
    return cover


@dataclass
class MappingResult:
    mapped: MappedNetlist
    certificates: list[PlausibilityCertificate]
    area_ge: Fraction
    tables: list[dict]  # absfunc table per instance


def map_circuit(n: Netlist, lib: Optional[CellLibrary] = None,
                viable: Optional[MergedSpec] = None) -> MappingResult:
    """Cover ``n`` with camouflaged cells and drop every select input.

    Certificates are produced for select codes ``0..viable.n-1`` (or every
    code when no viable set is given).
    """
    lib = lib or default_library()
    if n.has_mux():
        raise ValueError("map_circuit expects a gate-mapped netlist without MUX2")
    if n.num_data == 0:
        raise ValueError("mapped circuits need at least one data input")
    n = _with_select_buffers(n)
    codes = list(range(viable.n if viable is not None else 1 << n.num_selects))
    if viable is not None and viable.select_count != n.num_selects:
        raise ValueError("netlist select count does not match the viable set")
    sel_values = select_values(n)
    cover: dict[int, Choice] = {}
    for tree in split_into_trees(n):
        tree_cover(n, tree, lib, sel_values, codes, cover)

    instances: list[Instance] = []
    tables: list[dict] = []
    built: dict[int, int] = {}
    d = n.num_data

    def signal(w: int) -> int:
        if w < d:
            return w
        hit = built.get(w)
        if hit is not None:
            return hit
        ch = cover[w]
        fanins = [signal(l) for l in ch.leaves]
        active = dict(zip(ch.pin_map, fanins))
        dummy = fanins[0] if fanins else 0
        pins = tuple(active.get(p, dummy) for p in range(ch.cell.arity))
        instances.append(Instance(ch.cell.name, pins, ch.pin_map))
        tables.append(ch.table)
        wire = d + len(instances) - 1
        built[w] = wire
        return wire

    drivers = tuple(signal(w) for w in n.drivers)
    mapped = MappedNetlist(n.data_inputs, n.outputs, tuple(instances), drivers)
    certs = []
    for code in codes:
        configs = []
        for inst, table in zip(instances, tables):
            cell = lib[inst.cell]
            bits = spread_bits(table[code], len(inst.pin_map), cell.arity, inst.pin_map)
            idx = cell.plausible_index(bits)
            if idx is None:
                raise AssertionError("certificate function outside the plausible set")
            configs.append(idx)
        certs.append(PlausibilityCertificate(code, tuple(configs)))
    return MappingResult(mapped, certs, mapped.area(lib), tables)


def manifest_text(result: MappingResult, lib: CellLibrary, names: Optional[Sequence[str]] = None,
                  assignment: Optional[PinAssignment] = None) -> str:
    """Designer-private doping manifest, one block per viable function."""
    lines = ["# doping manifest: instance_id cell_name plausible_index pin_map"]
    for cert in result.certificates:
        head = f"function {cert.code}"
        if names is not None:
            head += f" {names[cert.code]}"
        if assignment is not None:
            p, q = assignment.perms(cert.code)
            head += f" in={','.join(map(str, p))} out={','.join(map(str, q))}"
        lines.append(head)
        for j, (inst, idx) in enumerate(zip(result.mapped.instances, cert.configs)):
            pins = ",".join(map(str, inst.pin_map)) or "-"
            lines.append(f"{j} {inst.cell} {idx} {pins}")
        lines.append("end")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ManifestBlock:
    code: int
    name: Optional[str]
    in_perm: Optional[tuple[int, ...]]
    out_perm: Optional[tuple[int, ...]]
    certificate: PlausibilityCertificate
    pin_maps: tuple[tuple[int, ...], ...]


def parse_manifest(text: str) -> list[ManifestBlock]:
    blocks: list[ManifestBlock] = []
    cur = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "function":
            if cur is not None:
                raise ValueError(f"line {lineno}: previous function block not closed")
            code = int(parts[1])
            name = None
            perms: dict[str, tuple[int, ...]] = {}
            for extra in parts[2:]:
                if extra.startswith(("in=", "out=")):
                    key, val = extra.split("=", 1)
                    perms[key] = tuple(int(v) for v in val.split(","))
                else:
                    name = extra
            cur = (code, name, perms.get("in"), perms.get("out"), [], [])
        elif parts[0] == "end":
            if cur is None:
                raise ValueError(f"line {lineno}: 'end' outside a function block")
            code, name, p, q, configs, maps = cur
            blocks.append(ManifestBlock(code, name, p, q, PlausibilityCertificate(code, tuple(configs)),
                                        tuple(maps)))
            cur = None
        else:
            if cur is None or len(parts) != 4:
                raise ValueError(f"line {lineno}: expected 'instance_id cell_name plausible_index pin_map'")
            idx = int(parts[0])
            if idx != len(cur[4]):
                raise ValueError(f"line {lineno}: instance ids must be listed in order")
            cur[4].append(int(parts[2]))
            cur[5].append(() if parts[3] == "-" else tuple(int(v) for v in parts[3].split(",")))
    if cur is not None:
        raise ValueError("manifest ends inside a function block")
    return blocks
