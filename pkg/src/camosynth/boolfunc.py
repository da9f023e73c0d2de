"""Small multi-output Boolean functions stored as truth-table bitvectors.

Bit convention used throughout the package: row ``r`` of a table assigns
input ``i`` the value of bit ``i`` of ``r`` (input 0 is the least
significant bit of the row index).  Output ``j`` of a table is an integer
whose bit ``r`` is the value of that output on row ``r``.  Hex strings list
one digit per row, row 0 first, and a digit's bit ``j`` is output ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

MAX_INPUTS = 16


def full_mask(num_inputs: int) -> int:
    return (1 << (1 << num_inputs)) - 1


@lru_cache(maxsize=None)
def var_mask(index: int, num_inputs: int) -> int:
    """Truth table of the projection onto input ``index``."""
    block = 1 << index
    unit = ((1 << block) - 1) << block  # `block` zeros followed by `block` ones
    pattern = 0
    for start in range(0, 1 << num_inputs, 2 * block):
        pattern |= unit << start
    return pattern


def cofactor_bits(bits: int, index: int, value: int, num_inputs: int) -> int:
    """Fix input ``index`` to ``value`` in a single-output bitvector.

    The input keeps its slot: the result simply no longer depends on it.
    """
    m = var_mask(index, num_inputs)
    shift = 1 << index
    if value:
        hi = bits & m
        return hi | (hi >> shift)
    lo = bits & ~m & full_mask(num_inputs)
    return lo | (lo << shift)


def depends_on(bits: int, index: int, num_inputs: int) -> bool:
    return cofactor_bits(bits, index, 0, num_inputs) != cofactor_bits(bits, index, 1, num_inputs)


def support(bits: int, num_inputs: int) -> tuple[int, ...]:
    return tuple(i for i in range(num_inputs) if depends_on(bits, i, num_inputs))


@dataclass(frozen=True)
class TruthTable:
    num_inputs: int
    num_outputs: int
    bits: tuple[int, ...]

    def __post_init__(self):
        if not 0 <= self.num_inputs <= MAX_INPUTS:
            raise ValueError(f"num_inputs must be in 0..{MAX_INPUTS}, got {self.num_inputs}")
        if self.num_outputs < 1:
            raise ValueError("a truth table needs at least one output")
        if len(self.bits) != self.num_outputs:
            raise ValueError(f"expected {self.num_outputs} output vectors, got {len(self.bits)}")
        mask = full_mask(self.num_inputs)
        for b in self.bits:
            if b < 0 or b & ~mask:
                raise ValueError("bitvector has bits beyond 2^num_inputs rows")

    @classmethod
    def single(cls, num_inputs: int, bits: int) -> "TruthTable":
        return cls(num_inputs, 1, (bits,))

    @classmethod
    def constant(cls, num_inputs: int, value: int) -> "TruthTable":
        return cls.single(num_inputs, full_mask(num_inputs) if value else 0)

    @classmethod
    def var(cls, num_inputs: int, index: int) -> "TruthTable":
        return cls.single(num_inputs, var_mask(index, num_inputs))

    @classmethod
    def from_rows(cls, num_inputs: int, num_outputs: int, rows: Sequence[int]) -> "TruthTable":
        """Build from a lookup table ``rows[r]`` = output word of row ``r``."""
        if len(rows) != 1 << num_inputs:
            raise ValueError(f"expected {1 << num_inputs} rows, got {len(rows)}")
        bits = [0] * num_outputs
        for r, word in enumerate(rows):
            if word >> num_outputs:
                raise ValueError(f"row {r} value {word} does not fit in {num_outputs} outputs")
            for j in range(num_outputs):
                if word >> j & 1:
                    bits[j] |= 1 << r
        return cls(num_inputs, num_outputs, tuple(bits))

    @property
    def num_rows(self) -> int:
        return 1 << self.num_inputs

    def output(self, j: int) -> "TruthTable":
        return TruthTable.single(self.num_inputs, self.bits[j])

    def rows(self) -> list[int]:
        return [tt_eval(self, r) for r in range(self.num_rows)]

    def to_hex(self) -> str:
        if self.num_outputs > 4:
            raise ValueError("hex form holds at most 4 outputs per row")
        return "".join("%X" % w for w in self.rows())

    def __invert__(self) -> "TruthTable":
        mask = full_mask(self.num_inputs)
        return TruthTable(self.num_inputs, self.num_outputs, tuple(b ^ mask for b in self.bits))

    def __str__(self):
        if self.num_outputs <= 4:
            return f"TT{self.num_inputs}x{self.num_outputs}[{self.to_hex()}]"
        return f"TT{self.num_inputs}x{self.num_outputs}{self.bits}"


def tt_from_hex(text: str, num_inputs: int, num_outputs: int) -> TruthTable:
    if not 1 <= num_outputs <= 4:
        raise ValueError("hex tables carry 1..4 outputs per digit")
    text = text.strip()
    if len(text) != 1 << num_inputs:
        raise ValueError(f"expected {1 << num_inputs} hex digits for {num_inputs} inputs, got {len(text)}")
    rows = []
    for pos, ch in enumerate(text):
        try:
            d = int(ch, 16)
        except ValueError:
            raise ValueError(f"invalid hex digit {ch!r} at position {pos}") from None
        if d >> num_outputs:
            raise ValueError(f"digit {ch!r} at position {pos} exceeds {num_outputs} output bits")
        rows.append(d)
    return TruthTable.from_rows(num_inputs, num_outputs, rows)


def tt_equal(f: TruthTable, g: TruthTable) -> bool:
    if (f.num_inputs, f.num_outputs) != (g.num_inputs, g.num_outputs):
        raise ValueError(f"arity mismatch: {f.num_inputs}x{f.num_outputs} vs {g.num_inputs}x{g.num_outputs}")
    return f.bits == g.bits


def tt_eval(f: TruthTable, row: int) -> int:
    if not 0 <= row < f.num_rows:
        raise ValueError(f"row {row} out of range for {f.num_inputs} inputs")
    word = 0
    for j, b in enumerate(f.bits):
        word |= (b >> row & 1) << j
    return word


def _require_single(f: TruthTable) -> None:
    if f.num_outputs != 1:
        raise ValueError("operation needs a single-output table")


def cofactor(f: TruthTable, index: int, value: int) -> TruthTable:
    _require_single(f)
    if not 0 <= index < f.num_inputs:
        raise ValueError(f"input {index} out of range for {f.num_inputs} inputs")
    return TruthTable.single(f.num_inputs, cofactor_bits(f.bits[0], index, value, f.num_inputs))


def closure_bits(bits: int, num_inputs: int) -> frozenset[int]:
    seen = {bits}
    todo = [bits]
    while todo:
        b = todo.pop()
        for i in range(num_inputs):
            for v in (0, 1):
                c = cofactor_bits(b, i, v, num_inputs)
                if c not in seen:
                    seen.add(c)
                    todo.append(c)
    return frozenset(seen)


def cofactor_closure(f: TruthTable) -> frozenset[TruthTable]:
    """Every function reachable from ``f`` by fixing inputs, ``f`` included."""
    _require_single(f)
    return frozenset(TruthTable.single(f.num_inputs, b) for b in closure_bits(f.bits[0], f.num_inputs))


def check_permutation(perm: Sequence[int], size: int, what: str = "permutation") -> tuple[int, ...]:
    perm = tuple(perm)
    if len(perm) != size:
        raise ValueError(f"{what} has {len(perm)} entries, expected {size}")
    if sorted(perm) != list(range(size)):
        raise ValueError(f"{what} {perm} is not a bijection on 0..{size - 1}")
    return perm


@lru_cache(maxsize=4096)
def _source_rows(num_inputs: int, in_perm: tuple[int, ...]) -> tuple[int, ...]:
    # g's row r reads f's row s where bit i of s is bit in_perm[i] of r
    src = []
    for r in range(1 << num_inputs):
        s = 0
        for i, p in enumerate(in_perm):
            s |= (r >> p & 1) << i
        src.append(s)
    return tuple(src)


def permute_bits(bits: int, num_inputs: int, in_perm: tuple[int, ...]) -> int:
    if in_perm == tuple(range(num_inputs)):
        return bits
    src = _source_rows(num_inputs, in_perm)
    out = 0
    for r, s in enumerate(src):
        if bits >> s & 1:
            out |= 1 << r
    return out


def permute(f: TruthTable, in_perm: Iterable[int], out_perm: Iterable[int]) -> TruthTable:
    """Relabel pins: ``g(x)[out_perm[j]] == f(y)[j]`` with ``y[i] = x[in_perm[i]]``."""
    in_perm = check_permutation(in_perm, f.num_inputs, "input permutation")
    out_perm = check_permutation(out_perm, f.num_outputs, "output permutation")
    out = [0] * f.num_outputs
    for j, b in enumerate(f.bits):
        out[out_perm[j]] = permute_bits(b, f.num_inputs, in_perm)
    return TruthTable(f.num_inputs, f.num_outputs, tuple(out))


def compose_permutations(first: Sequence[int], second: Sequence[int]) -> tuple[int, ...]:
    """The single permutation equal to applying ``first`` and then ``second``."""
    return tuple(second[p] for p in first)


def parse_sboxes(text: str) -> dict[str, TruthTable]:
    """Read ``NAME HEXSTRING NUM_IN NUM_OUT`` records; ``#`` starts a comment."""
    tables: dict[str, TruthTable] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"line {lineno}: expected 'NAME HEXSTRING NUM_IN NUM_OUT'")
        name, hexstr, n_in, n_out = parts
        if name in tables:
            raise ValueError(f"line {lineno}: duplicate S-box name {name}")
        try:
            tables[name] = tt_from_hex(hexstr, int(n_in), int(n_out))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return tables
