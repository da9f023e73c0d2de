"""Gate-level netlists with first-class select inputs, and the .cnl text format.

Wires are dense integers: data inputs first, then select inputs, then one
wire per gate in topological order.  Names exist only at the interface.

Text format (``#`` starts a comment)::

    .inputs a b c
    .selects s0
    .outputs y0 y1
    .gate NAND2 n3 = a b
    .gate MUX2 y0 = n3 c s0      # MUX2 pins: d0 d1 sel
    .assign y1 = a               # bind an output to an existing wire
    .end

A gate whose output wire carries an output name drives that output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .boolfunc import TruthTable, full_mask, var_mask
from .celllib import GATE_KINDS, gate_bits

KINDS = GATE_KINDS + ("MUX2",)


class NetlistError(ValueError):
    def __init__(self, message: str, lineno: Optional[int] = None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


@dataclass(frozen=True)
class Gate:
    kind: str
    fanins: tuple[int, ...]

    @property
    def arity(self) -> int:
        return len(self.fanins)

    @property
    def type_name(self) -> str:
        if self.kind in ("INV", "BUF", "MUX2"):
            return self.kind
        return f"{self.kind}{self.arity}"


def parse_type_name(name: str) -> tuple[str, Optional[int]]:
    name = name.upper()
    if name in ("INV", "BUF", "MUX2"):
        return name, {"INV": 1, "BUF": 1, "MUX2": 3}[name]
    kind = name.rstrip("0123456789")
    digits = name[len(kind):]
    if kind not in KINDS:
        raise ValueError(f"unknown gate kind {name!r}")
    return kind, int(digits) if digits else None


def eval_gate(kind: str, values: Sequence[int], mask: int) -> int:
    """Bit-parallel gate evaluation on integer bitvectors."""
    if kind == "INV":
        return mask & ~values[0]
    if kind == "BUF":
        return values[0]
    if kind == "MUX2":
        d0, d1, s = values
        return (d0 & ~s | d1 & s) & mask
    if kind in ("AND", "NAND"):
        acc = mask
        for v in values:
            acc &= v
        return acc if kind == "AND" else mask & ~acc
    acc = 0
    for v in values:
        acc |= v
    return acc if kind == "OR" else mask & ~acc


@dataclass(frozen=True)
class Netlist:
    data_inputs: tuple[str, ...]
    select_inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    gates: tuple[Gate, ...]
    drivers: tuple[int, ...]  # wire driving each output
    _fanout_cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        names = list(self.data_inputs) + list(self.select_inputs)
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise NetlistError(f"input names declared twice: {', '.join(dup)}")
        if len(set(self.outputs)) != len(self.outputs):
            raise NetlistError("duplicate output names")
        if len(self.drivers) != len(self.outputs):
            raise NetlistError("every output needs exactly one driver")
        base = self.num_inputs
        for g_idx, g in enumerate(self.gates):
            wire = base + g_idx
            if g.kind not in KINDS:
                raise NetlistError(f"unknown gate kind {g.kind}")
            if g.kind in ("INV", "BUF") and g.arity != 1:
                raise NetlistError(f"{g.kind} takes one input")
            if g.kind == "MUX2" and g.arity != 3:
                raise NetlistError("MUX2 takes three inputs (d0 d1 sel)")
            if g.kind in ("NAND", "NOR", "AND", "OR") and g.arity < 1:
                raise NetlistError(f"{g.kind} needs inputs")
            for f in g.fanins:
                if not 0 <= f < wire:
                    raise NetlistError(f"gate {wire} reads wire {f} which is not defined before it")
        for d in self.drivers:
            if not 0 <= d < self.num_wires:
                raise NetlistError(f"output driver {d} is not a wire")

    @property
    def num_data(self) -> int:
        return len(self.data_inputs)

    @property
    def num_selects(self) -> int:
        return len(self.select_inputs)

    @property
    def num_inputs(self) -> int:
        return len(self.data_inputs) + len(self.select_inputs)

    @property
    def num_wires(self) -> int:
        return self.num_inputs + len(self.gates)

    def gate_of(self, wire: int) -> Optional[Gate]:
        i = wire - self.num_inputs
        return self.gates[i] if i >= 0 else None

    def is_select(self, wire: int) -> bool:
        return self.num_data <= wire < self.num_inputs

    def fanout_counts(self) -> list[int]:
        """Number of gate pins plus output bindings reading each wire."""
        counts = self._fanout_cache.get("counts")
        if counts is None:
            counts = [0] * self.num_wires
            for g in self.gates:
                for f in g.fanins:
                    counts[f] += 1
            for d in self.drivers:
                counts[d] += 1
            self._fanout_cache["counts"] = counts
        return counts

    def has_mux(self) -> bool:
        return any(g.kind == "MUX2" for g in self.gates)

    def area(self, lib) -> Fraction:
        total = Fraction(0)
        for g in self.gates:
            total += lib.gate_cell(g.kind, g.arity).area_ge
        return total


def simulate_words(n: Netlist, input_words: Sequence[int], mask: int) -> list[int]:
    """Bit-parallel simulation; one integer per input, each bit a pattern."""
    if len(input_words) != n.num_inputs:
        raise NetlistError(f"expected {n.num_inputs} input words, got {len(input_words)}")
    values = list(input_words)
    for g in n.gates:
        values.append(eval_gate(g.kind, [values[f] for f in g.fanins], mask))
    return values


def exhaustive_words(num_vars: int) -> list[int]:
    return [var_mask(i, num_vars) for i in range(num_vars)]


def simulate(n: Netlist, data: int, sel: int = 0) -> int:
    """Evaluate one pattern; ``data``/``sel`` are rows (bit i = input i)."""
    if data >> n.num_data or sel >> n.num_selects or data < 0 or sel < 0:
        raise NetlistError("input row out of range")
    words = [data >> i & 1 for i in range(n.num_data)] + [sel >> i & 1 for i in range(n.num_selects)]
    values = simulate_words(n, words, 1)
    word = 0
    for j, d in enumerate(n.drivers):
        word |= values[d] << j
    return word


def output_tables(n: Netlist) -> list[int]:
    """Exhaustive output bitvectors over all data and select inputs.

    Row index packs the data inputs in the low bits and the select inputs
    above them.
    """
    total = n.num_inputs
    values = simulate_words(n, exhaustive_words(total), full_mask(total))
    return [values[d] for d in n.drivers]


def function_under_select(n: Netlist, sel: int):
    """The data-input truth table the netlist computes with selects fixed to ``sel``."""
    words = exhaustive_words(n.num_data)
    mask = full_mask(n.num_data)
    words += [mask if sel >> i & 1 else 0 for i in range(n.num_selects)]
    values = simulate_words(n, words, mask)
    return TruthTable(n.num_data, len(n.drivers), tuple(values[d] for d in n.drivers))


class NetlistBuilder:
    """Incremental construction helper used by merge, synth and tests."""

    def __init__(self, data_inputs: Iterable[str], select_inputs: Iterable[str] = ()):
        self.data_inputs = tuple(data_inputs)
        self.select_inputs = tuple(select_inputs)
        self.gates: list[Gate] = []
        self.outputs: list[str] = []
        self.drivers: list[int] = []
        self._hash: dict = {}

    def data(self, i: int) -> int:
        return i

    def select(self, i: int) -> int:
        return len(self.data_inputs) + i

    def add(self, kind: str, *fanins: int, share: bool = True) -> int:
        key = (kind, fanins)
        if share and key in self._hash:
            return self._hash[key]
        self.gates.append(Gate(kind, tuple(fanins)))
        wire = len(self.data_inputs) + len(self.select_inputs) + len(self.gates) - 1
        if share:
            self._hash[key] = wire
        return wire

    def output(self, name: str, wire: int) -> None:
        self.outputs.append(name)
        self.drivers.append(wire)

    def build(self) -> Netlist:
        return Netlist(self.data_inputs, self.select_inputs, tuple(self.outputs),
                       tuple(self.gates), tuple(self.drivers))


def emit(n: Netlist, header: Optional[str] = None) -> str:
    names = list(n.data_inputs) + list(n.select_inputs)
    taken = set(names) | set(n.outputs)

    def fresh(i: int) -> str:
        name = f"n{i}"
        while name in taken:
            name = "_" + name
        return name

    wire_names = names + [fresh(n.num_inputs + i) for i in range(len(n.gates))]
    lines = []
    if header:
        lines += [f"# {h}" for h in header.splitlines()]
    lines.append(".inputs " + " ".join(n.data_inputs) if n.data_inputs else ".inputs")
    if n.select_inputs:
        lines.append(".selects " + " ".join(n.select_inputs))
    lines.append(".outputs " + " ".join(n.outputs))
    for i, g in enumerate(n.gates):
        w = n.num_inputs + i
        ins = " ".join(wire_names[f] for f in g.fanins)
        lines.append(f".gate {g.type_name} {wire_names[w]} = {ins}")
    for name, d in zip(n.outputs, n.drivers):
        lines.append(f".assign {name} = {wire_names[d]}")
    lines.append(".end")
    return "\n".join(lines) + "\n"


def parse(text: str) -> Netlist:
    data: list[str] = []
    selects: list[str] = []
    outputs: list[str] = []
    seen_dirs: dict[str, int] = {}
    raw_gates: list[tuple[int, str, str, list[str]]] = []  # (lineno, kind, out, ins)
    assigns: dict[str, tuple[int, str]] = {}
    ended = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ended:
            raise NetlistError("content after .end", lineno)
        parts = line.split()
        head = parts[0]
        if head in (".inputs", ".selects", ".outputs"):
            if head in seen_dirs:
                raise NetlistError(f"{head} declared twice (first on line {seen_dirs[head]})", lineno)
            seen_dirs[head] = lineno
            {".inputs": data, ".selects": selects, ".outputs": outputs}[head].extend(parts[1:])
        elif head == ".gate":
            if len(parts) < 4 or parts[3] != "=":
                raise NetlistError("expected '.gate KIND out = in1 in2 ...'", lineno)
            try:
                kind, arity = parse_type_name(parts[1])
            except ValueError as e:
                raise NetlistError(str(e), lineno) from None
            ins = parts[4:]
            if arity is not None and arity != len(ins):
                raise NetlistError(f"{parts[1]} expects {arity} inputs, got {len(ins)}", lineno)
            if not ins:
                raise NetlistError(f"{parts[1]} has no inputs", lineno)
            raw_gates.append((lineno, kind, parts[2], ins))
        elif head == ".assign":
            if len(parts) != 4 or parts[2] != "=":
                raise NetlistError("expected '.assign OUT = WIRE'", lineno)
            if parts[1] in assigns:
                raise NetlistError(f"output {parts[1]} assigned twice", lineno)
            assigns[parts[1]] = (lineno, parts[3])
        elif head == ".end":
            ended = True
        else:
            raise NetlistError(f"unknown directive {head!r}", lineno)

    both = set(data) & set(selects)
    if both:
        raise NetlistError(f"wire declared as both data and select input: {', '.join(sorted(both))}")
    for group, label in ((data, "input"), (selects, "select"), (outputs, "output")):
        if len(set(group)) != len(group):
            raise NetlistError(f"duplicate {label} names")

    inputs = data + selects
    driver_line: dict[str, int] = {name: 0 for name in inputs}
    for lineno, kind, out, ins in raw_gates:
        if out in driver_line:
            raise NetlistError(f"wire {out!r} has more than one driver", lineno)
        driver_line[out] = lineno
    for lineno, kind, out, ins in raw_gates:
        for w in ins:
            if w not in driver_line:
                raise NetlistError(f"gate {out!r} reads undefined wire {w!r}", lineno)

    # stable topological order (file order whenever it is already valid)
    by_out = {g[2]: g for g in raw_gates}
    wire_id = {name: i for i, name in enumerate(inputs)}
    order: list = []
    state: dict[str, int] = {}  # 1 = visiting, 2 = done

    def visit(name: str) -> None:
        stack = [(name, 0)]
        while stack:
            w, k = stack.pop()
            g = by_out[w]
            if k == 0:
                if state.get(w) == 2:
                    continue
                state[w] = 1
            ins = g[3]
            while k < len(ins) and (ins[k] in wire_id or state.get(ins[k]) == 2):
                k += 1
            if k < len(ins):
                nxt = ins[k]
                if state.get(nxt) == 1:
                    raise NetlistError(f"combinational cycle through wire {nxt!r}", by_out[nxt][0])
                stack.append((w, k))
                stack.append((nxt, 0))
                continue
            state[w] = 2
            wire_id[w] = len(inputs) + len(order)
            order.append(g)

    for g in raw_gates:
        if state.get(g[2]) != 2:
            visit(g[2])

    gates = tuple(Gate(kind, tuple(wire_id[w] for w in ins)) for _, kind, _, ins in order)
    drivers = []
    for name in outputs:
        if name in assigns:
            lineno, w = assigns[name]
            if name in by_out:
                raise NetlistError(f"output {name!r} is both a gate and an .assign target", lineno)
            if w not in wire_id:
                raise NetlistError(f"output {name!r} assigned from undefined wire {w!r}", lineno)
            drivers.append(wire_id[w])
        elif name in wire_id:
            drivers.append(wire_id[name])
        else:
            raise NetlistError(f"output {name!r} has no driver")
    for name, (lineno, _) in assigns.items():
        if name not in outputs:
            raise NetlistError(f".assign target {name!r} is not a declared output", lineno)
    return Netlist(tuple(data), tuple(selects), tuple(outputs), gates, tuple(drivers))


def gate_function_bits(kind: str, arity: int) -> int:
    """Nominal truth table over the gate's own pins (MUX2 pins: d0 d1 sel)."""
    if kind == "MUX2":
        d0, d1, s = (var_mask(i, 3) for i in range(3))
        return (d0 & ~s | d1 & s) & 0xFF
    return gate_bits(kind, arity)
