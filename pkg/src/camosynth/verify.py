"""Exhaustive checks of mapped circuits against viable functions."""

from __future__ import annotations

import itertools
import math
from typing import Optional, Sequence

from .boolfunc import TruthTable, full_mask, permute
from .celllib import CellLibrary, default_library
from .netlist import exhaustive_words
from .techmap import MappedNetlist, PlausibilityCertificate

DEFAULT_LIMIT = 1 << 20


class EnumerationLimitError(ValueError):
    """Raised instead of silently truncating an attacker enumeration."""


class CertificateError(ValueError):
    pass


def cell_word(bits: int, inputs: Sequence[int], mask: int) -> int:
    """Evaluate a cell function (truth table over its pins) on bit-parallel input words."""
    out = 0
    for r in range(1 << len(inputs)):
        if bits >> r & 1:
            term = mask
            for i, w in enumerate(inputs):
                term &= w if r >> i & 1 else mask & ~w
            out |= term
    return out


def configured_function(m: MappedNetlist, configs: Sequence[int], lib: CellLibrary) -> TruthTable:
    """Simulate every data row with each instance set to its chosen plausible function."""
    if len(configs) != len(m.instances):
        raise CertificateError(f"certificate lists {len(configs)} instances, circuit has {len(m.instances)}")
    d = m.num_data
    mask = full_mask(d)
    values = exhaustive_words(d)
    for j, (inst, idx) in enumerate(zip(m.instances, configs)):
        cell = lib[inst.cell]
        if len(inst.fanins) != cell.arity:
            raise CertificateError(f"instance {j} has {len(inst.fanins)} fanins for {cell.name}")
        if not 0 <= idx < len(cell.plausible):
            raise CertificateError(f"instance {j}: index {idx} outside the {len(cell.plausible)} "
                                   f"plausible functions of {cell.name}")
        values.append(cell_word(cell.plausible[idx].bits[0], [values[f] for f in inst.fanins], mask))
    return TruthTable(d, len(m.drivers), tuple(values[w] for w in m.drivers))


def check_certificate(m: MappedNetlist, cert: PlausibilityCertificate, f: TruthTable,
                      perms: tuple[Sequence[int], Sequence[int]],
                      lib: Optional[CellLibrary] = None) -> bool:
    """True iff the configured circuit equals ``permute(f, *perms)`` on every row."""
    lib = lib or default_library()
    if f.num_inputs != m.num_data or f.num_outputs != len(m.drivers):
        raise CertificateError("function arity does not match the circuit")
    got = configured_function(m, cert.configs, lib)
    return got.bits == permute(f, *perms).bits


def configuration_count(m: MappedNetlist, lib: Optional[CellLibrary] = None) -> int:
    lib = lib or default_library()
    return math.prod(len(lib[i.cell].plausible) for i in m.instances)


def attacker_enumerate(m: MappedNetlist, candidates: Sequence[TruthTable], limit: int = DEFAULT_LIMIT,
                       lib: Optional[CellLibrary] = None) -> list[bool]:
    """Is each candidate realisable under some configuration and pin interpretation?

    Exhaustive over every configuration vector and every input/output pin
    permutation; refuses (raises) when the configuration space exceeds ``limit``.
    """
    lib = lib or default_library()
    total = configuration_count(m, lib)
    if total > limit:
        raise EnumerationLimitError(f"{total} configurations exceed the limit of {limit}; "
                                    "attacker enumeration is only for tiny circuits")
    d, p = m.num_data, len(m.drivers)
    images: list[set] = []
    for f in candidates:
        if f.num_inputs != d or f.num_outputs != p:
            raise ValueError("candidate arity does not match the circuit")
        images.append({permute(f, ip, op).bits
                       for ip in itertools.permutations(range(d))
                       for op in itertools.permutations(range(p))})
    verdict = [False] * len(candidates)
    sizes = [range(len(lib[i.cell].plausible)) for i in m.instances]
    for configs in itertools.product(*sizes):
        bits = configured_function(m, configs, lib).bits
        for k, img in enumerate(images):
            if not verdict[k] and bits in img:
                verdict[k] = True
        if all(verdict):
            break
    return verdict


def verdict_line(passed: bool, name: str, area_ge) -> str:
    return f"{'PASS' if passed else 'FAIL'} {name} {float(area_ge):.2f}"
