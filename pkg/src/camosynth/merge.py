"""Merged multi-function circuit: shared data inputs, select-driven mux trees."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .boolfunc import TruthTable, check_permutation, permute
from .netlist import Netlist, NetlistBuilder


@dataclass(frozen=True)
class PinAssignment:
    """Pin correspondence of every viable function onto the merged pins.

    Function 0 is the reference and always uses identity permutations, so
    only functions ``1..n-1`` are stored.
    """

    num_inputs: int
    num_outputs: int
    in_perms: tuple[tuple[int, ...], ...]
    out_perms: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.in_perms) != len(self.out_perms):
            raise ValueError("input and output permutation lists differ in length")
        for p in self.in_perms:
            check_permutation(p, self.num_inputs, "input permutation")
        for q in self.out_perms:
            check_permutation(q, self.num_outputs, "output permutation")

    @classmethod
    def identity(cls, n: int, num_inputs: int, num_outputs: int) -> "PinAssignment":
        ident_in = tuple(range(num_inputs))
        ident_out = tuple(range(num_outputs))
        return cls(num_inputs, num_outputs, (ident_in,) * (n - 1), (ident_out,) * (n - 1))

    @property
    def num_functions(self) -> int:
        return len(self.in_perms) + 1

    def perms(self, i: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        if i == 0:
            return tuple(range(self.num_inputs)), tuple(range(self.num_outputs))
        return self.in_perms[i - 1], self.out_perms[i - 1]

    def apply(self, functions: Sequence[TruthTable]) -> list[TruthTable]:
        if len(functions) != self.num_functions:
            raise ValueError(f"assignment covers {self.num_functions} functions, got {len(functions)}")
        return [permute(f, *self.perms(i)) for i, f in enumerate(functions)]

    def genes(self) -> tuple:
        return self.in_perms + self.out_perms

    def to_text(self) -> str:
        lines = [f"# pin assignment: {self.num_functions} functions, "
                 f"{self.num_inputs} inputs, {self.num_outputs} outputs"]
        for i in range(self.num_functions):
            p, q = self.perms(i)
            lines.append(f"{i} in={','.join(map(str, p))} out={','.join(map(str, q))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PinAssignment":
        rows = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                idx, ins, outs = line.split()
                p = tuple(int(v) for v in ins.removeprefix("in=").split(","))
                q = tuple(int(v) for v in outs.removeprefix("out=").split(","))
                rows[int(idx)] = (p, q)
            except ValueError:
                raise ValueError(f"line {lineno}: expected 'INDEX in=P0,P1,.. out=Q0,Q1,..'") from None
        if sorted(rows) != list(range(len(rows))) or len(rows) < 2:
            raise ValueError("assignment must list functions 0..n-1 (n >= 2)")
        p0, q0 = rows[0]
        if p0 != tuple(range(len(p0))) or q0 != tuple(range(len(q0))):
            raise ValueError("function 0 is the reference and must use identity permutations")
        rest = [rows[i] for i in range(1, len(rows))]
        return cls(len(p0), len(q0), tuple(r[0] for r in rest), tuple(r[1] for r in rest))


def select_count(n: int) -> int:
    if n < 2:
        raise ValueError("merging needs at least two functions")
    return (n - 1).bit_length()


@dataclass(frozen=True)
class MergedSpec:
    functions: tuple[TruthTable, ...]
    assignment: PinAssignment

    def __post_init__(self):
        fs = self.functions
        if len(fs) < 2:
            raise ValueError("merging needs at least two functions")
        shape = (fs[0].num_inputs, fs[0].num_outputs)
        if any((f.num_inputs, f.num_outputs) != shape for f in fs):
            raise ValueError("all viable functions must have the same input/output arity")
        if self.assignment.num_functions != len(fs):
            raise ValueError("pin assignment does not cover every function")
        if (self.assignment.num_inputs, self.assignment.num_outputs) != shape:
            raise ValueError("pin assignment arity does not match the functions")

    @classmethod
    def of(cls, functions: Sequence[TruthTable], assignment: Optional[PinAssignment] = None) -> "MergedSpec":
        functions = tuple(functions)
        if assignment is None:
            assignment = PinAssignment.identity(len(functions), functions[0].num_inputs,
                                                functions[0].num_outputs)
        return cls(functions, assignment)

    @property
    def n(self) -> int:
        return len(self.functions)

    @property
    def select_count(self) -> int:
        return select_count(self.n)

    def targets(self) -> list[TruthTable]:
        """The function each select code must realise (codes >= n alias the last)."""
        permuted = self.assignment.apply(self.functions)
        return [permuted[min(code, self.n - 1)] for code in range(1 << self.select_count)]


def _sop(b: NetlistBuilder, bits: int, num_data: int, inverted: list) -> int:
    """Canonical minterm sum-of-products for one output bitvector."""
    terms = []
    for row in range(1 << num_data):
        if bits >> row & 1:
            lits = [i if row >> i & 1 else inverted[i] for i in range(num_data)]
            terms.append(lits[0] if len(lits) == 1 else b.add("AND", *lits))
    if not terms:
        return b.add("AND", 0, inverted[0])
    if len(terms) == 1:
        return terms[0]
    return b.add("OR", *terms)


def build_merged(spec: MergedSpec) -> Netlist:
    m = spec.functions[0].num_inputs
    p = spec.functions[0].num_outputs
    if m < 1:
        raise ValueError("merged functions need at least one data input")
    s = spec.select_count
    b = NetlistBuilder([f"x{i}" for i in range(m)], [f"s{i}" for i in range(s)])
    inverted = [b.add("INV", i) for i in range(m)]
    permuted = spec.assignment.apply(spec.functions)
    bodies = [[_sop(b, g.bits[k], m, inverted) for k in range(p)] for g in permuted]
    for k in range(p):
        level = [bodies[min(code, spec.n - 1)][k] for code in range(1 << s)]
        for bit in range(s):
            sel = b.select(bit)
            level = [lo if lo == hi else b.add("MUX2", lo, hi, sel)
                     for lo, hi in zip(level[0::2], level[1::2])]
        b.output(f"y{k}", level[0])
    return b.build()
