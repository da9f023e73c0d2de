"""Camouflaged standard cells and containment matching.

A camouflaged cell looks like its nominal gate but its doping may tie any
subset of inputs to a constant, so it can realise every function in the
cofactor closure of the nominal function.  Plausible functions are kept in
a fixed order (ascending bitvector) so that a configuration is just an
index into ``CamoCell.plausible``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional

from .boolfunc import TruthTable, closure_bits, full_mask, var_mask

GATE_KINDS = ("INV", "BUF", "NAND", "NOR", "AND", "OR")

DEFAULT_AREAS = {
    "INV": "0.67", "BUF": "0.67",
    "NAND2": "1.0", "NOR2": "1.0", "AND2": "1.33", "OR2": "1.33",
    "NAND3": "1.33", "NOR3": "1.33", "AND3": "1.67", "OR3": "1.67",
    "NAND4": "1.67", "NOR4": "1.67", "AND4": "2.0", "OR4": "2.0",
}


def gate_bits(kind: str, arity: int) -> int:
    """Nominal truth table of a library gate over its own pins."""
    mask = full_mask(arity)
    pins = [var_mask(i, arity) for i in range(arity)]
    if kind == "INV":
        return mask & ~pins[0]
    if kind == "BUF":
        return pins[0]
    acc_and = mask
    acc_or = 0
    for p in pins:
        acc_and &= p
        acc_or |= p
    return {
        "AND": acc_and,
        "NAND": mask & ~acc_and,
        "OR": acc_or,
        "NOR": mask & ~acc_or,
    }[kind]


def split_cell_name(name: str) -> tuple[str, int]:
    """'NAND3' -> ('NAND', 3); 'INV' -> ('INV', 1)."""
    if name in ("INV", "BUF"):
        return name, 1
    kind = name.rstrip("0123456789")
    digits = name[len(kind):]
    if kind not in GATE_KINDS or not digits:
        raise ValueError(f"unknown cell name {name!r}")
    return kind, int(digits)


@dataclass(frozen=True)
class CamoCell:
    name: str
    arity: int
    nominal: TruthTable
    area_ge: Fraction
    plausible: tuple[TruthTable, ...] = field(default=())

    def __post_init__(self):
        if not 1 <= self.arity <= 4:
            raise ValueError(f"cell {self.name}: arity must be 1..4")
        if self.nominal.num_inputs != self.arity or self.nominal.num_outputs != 1:
            raise ValueError(f"cell {self.name}: nominal function has the wrong shape")
        if self.area_ge <= 0:
            raise ValueError(f"cell {self.name}: area must be positive")
        closure = tuple(
            TruthTable.single(self.arity, b)
            for b in sorted(closure_bits(self.nominal.bits[0], self.arity))
        )
        object.__setattr__(self, "plausible", closure)
        object.__setattr__(self, "_index", {t.bits[0]: i for i, t in enumerate(closure)})

    def plausible_index(self, bits: int) -> Optional[int]:
        return self._index.get(bits)

    def plausible_bits(self) -> frozenset[int]:
        return frozenset(self._index)


def make_cell(name: str, area_ge, nominal_bits: Optional[int] = None, arity: Optional[int] = None) -> CamoCell:
    if nominal_bits is None:
        kind, arity = split_cell_name(name)
        nominal_bits = gate_bits(kind, arity)
    if arity is None:
        raise ValueError("arity is required for a custom nominal function")
    return CamoCell(name, arity, TruthTable.single(arity, nominal_bits), Fraction(area_ge))


class CellLibrary:
    def __init__(self, cells: Iterable[CamoCell]):
        self.cells = tuple(cells)
        names = [c.name for c in self.cells]
        if len(set(names)) != len(names):
            raise ValueError("duplicate cell names in library")
        self.by_name = {c.name: c for c in self.cells}
        # deterministic preference order for matching
        self._ordered = sorted(self.cells, key=lambda c: (c.area_ge, c.arity, c.name))
        self._match_cache: dict = {}

    def __getitem__(self, name: str) -> CamoCell:
        return self.by_name[name]

    def __contains__(self, name: str) -> bool:
        return name in self.by_name

    def __iter__(self):
        return iter(self.cells)

    def __len__(self):
        return len(self.cells)

    def area(self, name: str) -> Fraction:
        return self.by_name[name].area_ge

    def gate_cell(self, kind: str, arity: int) -> CamoCell:
        """Cell implementing a netlist gate kind (INV/BUF have no digits)."""
        name = kind if kind in ("INV", "BUF") else f"{kind}{arity}"
        return self.by_name[name]

    def match(self, required: frozenset[int], k: int):
        """Cached core of :func:`match_cell` working on raw bitvectors."""
        key = (k, required)
        hit = self._match_cache.get(key, False)
        if hit is not False:
            return hit
        result = None
        for cell in self._ordered:
            if cell.arity < k:
                continue
            pmap = _find_pin_map(required, k, cell)
            if pmap is not None:
                result = (cell, pmap)
                break
        self._match_cache[key] = result
        return result


@lru_cache(maxsize=None)
def _spread_rows(k: int, m: int, pin_map: tuple[int, ...]) -> tuple[int, ...]:
    # for each row of the m-pin cell, the row of the k-variable function it reads
    rows = []
    for r in range(1 << m):
        s = 0
        for v, pin in enumerate(pin_map):
            s |= (r >> pin & 1) << v
        rows.append(s)
    return tuple(rows)


def spread_bits(bits: int, k: int, m: int, pin_map: tuple[int, ...]) -> int:
    """Re-express a k-variable function on m cell pins; unmapped pins are don't-cares."""
    out = 0
    for r, s in enumerate(_spread_rows(k, m, pin_map)):
        if bits >> s & 1:
            out |= 1 << r
    return out


def _find_pin_map(required: frozenset[int], k: int, cell: CamoCell) -> Optional[tuple[int, ...]]:
    members = cell.plausible_bits()
    for pin_map in itertools.permutations(range(cell.arity), k):
        if all(spread_bits(f, k, cell.arity, pin_map) in members for f in required):
            return pin_map
    return None


def match_cell(required: Iterable[TruthTable], lib: CellLibrary):
    """Cheapest cell whose plausible set contains every required function.

    Returns ``(cell, pin_map)`` where ``pin_map[v]`` is the cell pin wired
    to variable ``v``, or ``None`` when no cell qualifies.  Ties go to lower
    area, then lower arity, then name.
    """
    required = list(required)
    if not required:
        raise ValueError("match_cell needs at least one required function")
    k = required[0].num_inputs
    if any(f.num_inputs != k or f.num_outputs != 1 for f in required):
        raise ValueError("required functions must be single-output with a common arity")
    if k > 4:
        return None
    return lib.match(frozenset(f.bits[0] for f in required), k)


def default_library() -> CellLibrary:
    return CellLibrary(make_cell(name, area) for name, area in DEFAULT_AREAS.items())


def parse_library(text: str) -> CellLibrary:
    """Read ``NAME ARITY HEX_NOMINAL AREA_GE`` lines; plausible sets are recomputed."""
    cells = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"line {lineno}: expected NAME ARITY HEX_NOMINAL AREA_GE")
        name, arity, hex_nominal, area = parts
        arity = int(arity)
        if len(hex_nominal) != 1 << arity:
            raise ValueError(f"line {lineno}: nominal needs {1 << arity} hex digits")
        bits = 0
        for r, ch in enumerate(hex_nominal):
            d = int(ch, 16)
            if d > 1:
                raise ValueError(f"line {lineno}: nominal digits must be 0 or 1")
            bits |= d << r
        cells.append(make_cell(name, area, bits, arity))
    return CellLibrary(cells)
