"""Internal synthesis engine: AIG passes plus covering into base gates."""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from ..boolfunc import TruthTable
from ..celllib import CellLibrary
from ..merge import MergedSpec, PinAssignment, build_merged
from ..netlist import Netlist
from .aig import Aig, netlist_to_aig
from .mapper import SynthReport, aig_to_gates
from .passes import SCRIPT, balance, refactor, rewrite, synth_script

__all__ = [
    "Aig", "SCRIPT", "SynthReport", "aig_to_gates", "balance", "netlist_to_aig",
    "refactor", "rewrite", "synth_area", "synth_script", "synthesize",
]


def synthesize(n: Netlist, lib: Optional[CellLibrary] = None, check=None) -> tuple[Netlist, SynthReport]:
    """Full flow from any netlist (MUX2 allowed) to a base-gate netlist."""
    log: list = []
    aig = synth_script(netlist_to_aig(n), log=log, check=check)
    mapped, report = aig_to_gates(aig, lib, n.data_inputs, n.select_inputs, n.outputs)
    report.passes = log
    return mapped, report


def synth_area(functions: Sequence[TruthTable], assignment: Optional[PinAssignment] = None,
               lib: Optional[CellLibrary] = None) -> Fraction:
    """Area in GE of the synthesized merge of ``functions`` under ``assignment``."""
    merged = build_merged(MergedSpec.of(functions, assignment))
    return synthesize(merged, lib)[1].area_ge
