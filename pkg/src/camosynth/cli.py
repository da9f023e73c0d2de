"""Command-line driver: merge, optimize, map, verify and bench."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import data
from .boolfunc import TruthTable, parse_sboxes
from .celllib import default_library, parse_library
from .ga import GaConfig, histogram_csv, random_search, run_ga
from .merge import MergedSpec, PinAssignment, build_merged
from .netlist import emit, parse
from .synth import synthesize
from .techmap import MappedNetlist, manifest_text, map_circuit, parse_manifest
from .verify import check_certificate, verdict_line

log = logging.getLogger("camosynth")


@dataclass(frozen=True)
class BenchRow:
    suite: str
    random_avg_ge: float
    random_best_ge: float
    ga_ge: float
    ga_tm_ge: float
    improvement_pct: float

    HEADER = "suite,random_avg_ge,random_best_ge,ga_ge,ga_tm_ge,improvement_pct"

    @classmethod
    def compute(cls, suite: str, random_areas: Sequence[Fraction], ga: Fraction, ga_tm: Fraction) -> "BenchRow":
        avg = float(sum(random_areas, Fraction(0)) / len(random_areas))
        best = min(random_areas)
        improvement = float((best - ga_tm) / best * 100)
        return cls(suite, round(avg, 2), round(float(best), 2), round(float(ga), 2),
                   round(float(ga_tm), 2), round(improvement, 2))

    def to_csv(self) -> str:
        return (f"{self.suite},{self.random_avg_ge:.2f},{self.random_best_ge:.2f},"
                f"{self.ga_ge:.2f},{self.ga_tm_ge:.2f},{self.improvement_pct:.2f}")

    @classmethod
    def from_csv(cls, line: str) -> "BenchRow":
        suite, *nums = line.strip().split(",")
        if len(nums) != 5:
            raise ValueError(f"bench row needs 6 fields: {line!r}")
        return cls(suite, *(float(v) for v in nums))

    def pretty(self) -> str:
        head = f"{'suite':<10} {'rand avg':>9} {'rand best':>9} {'GA':>9} {'GA+TM':>9} {'impr %':>7}"
        row = (f"{self.suite:<10} {self.random_avg_ge:>9.2f} {self.random_best_ge:>9.2f} "
               f"{self.ga_ge:>9.2f} {self.ga_tm_ge:>9.2f} {self.improvement_pct:>7.2f}")
        return head + "\n" + row


# input helpers

def _load_functions(args) -> tuple[list[str], list[TruthTable]]:
    if getattr(args, "suite", None):
        return data.suite_names(args.suite), data.suite(args.suite)
    if args.sboxes:
        tables = parse_sboxes(Path(args.sboxes).read_text())
    else:
        tables = data.bundled_sboxes()
    names = args.names or list(tables)
    missing = [n for n in names if n not in tables]
    if missing:
        raise SystemExit(f"error: unknown S-box name(s): {', '.join(missing)}")
    if len(names) < 2:
        raise SystemExit("error: at least two functions are needed")
    return names, [tables[n] for n in names]


def _load_assignment(path: Optional[str], functions: Sequence[TruthTable]) -> PinAssignment:
    if path is None:
        f = functions[0]
        return PinAssignment.identity(len(functions), f.num_inputs, f.num_outputs)
    a = PinAssignment.from_text(Path(path).read_text())
    if a.num_functions != len(functions):
        raise SystemExit(f"error: assignment covers {a.num_functions} functions, got {len(functions)}")
    return a


def _library(args):
    if getattr(args, "library", None):
        return parse_library(Path(args.library).read_text())
    return default_library()


def _ga_config(args) -> GaConfig:
    text = Path(args.config).read_text() if args.config else ""
    return GaConfig.from_text(text, seed=args.seed, jobs=args.jobs)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    log.info("wrote %s", path)


# subcommands

def cmd_merge(args) -> int:
    names, functions = _load_functions(args)
    spec = MergedSpec.of(functions, _load_assignment(args.assignment, functions))
    text = emit(build_merged(spec), header=f"merged: {' '.join(names)}")
    if args.output:
        _write(Path(args.output), text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_optimize(args) -> int:
    names, functions = _load_functions(args)
    cfg = _ga_config(args)
    out = _out_dir(args)
    best, history = run_ga(functions, cfg, progress=lambda r: log.info(
        "generation %d: best %.2f GE, mean %.2f GE, %d evaluations",
        r.generation, float(r.best_ge), r.mean_ge, r.evals))
    _write(out / "assignment.txt", best.to_text())
    _write(out / "history.csv", history.to_csv())
    print(f"GA best area: {float(history.best_ge):.2f} GE after {history.evaluations} evaluations")
    if args.random_baseline is not None:
        count = args.random_baseline or history.evaluations
        _, areas = random_search(functions, count, cfg.seed, cfg.jobs)
        _write(out / "random_histogram.csv", histogram_csv(areas))
        print(f"random best area: {float(min(areas)):.2f} GE over {count} assignments")
    return 0


def _map_and_write(names, functions, assignment, netlist, lib, out: Path):
    spec = MergedSpec.of(functions, assignment)
    result = map_circuit(netlist, lib, spec)
    _write(out / "mapped.cnl", emit(result.mapped.to_netlist(lib), header="camouflaged netlist"))
    _write(out / "manifest.txt", manifest_text(result, lib, names, assignment))
    return spec, result


def cmd_map(args) -> int:
    names, functions = _load_functions(args)
    assignment = _load_assignment(args.assignment, functions)
    lib = _library(args)
    if args.netlist:
        net = parse(Path(args.netlist).read_text())
        if net.has_mux():
            net, _ = synthesize(net, lib)
    else:
        net, _ = synthesize(build_merged(MergedSpec.of(functions, assignment)), lib)
    out = _out_dir(args)
    _, result = _map_and_write(names, functions, assignment, net, lib, out)
    print(f"mapped area: {float(result.area_ge):.2f} GE, {len(result.mapped.instances)} instances")
    return 0


def _verify(mapped: MappedNetlist, manifest: str, tables: dict, lib, area) -> tuple[bool, list[str]]:
    lines = []
    ok = True
    for block in parse_manifest(manifest):
        if block.name is None or block.name not in tables:
            raise SystemExit(f"error: manifest function {block.code} names no known S-box")
        f = tables[block.name]
        perms = (block.in_perm or tuple(range(f.num_inputs)), block.out_perm or tuple(range(f.num_outputs)))
        passed = check_certificate(mapped, block.certificate, f, perms, lib)
        ok &= passed
        lines.append(verdict_line(passed, block.name, area))
    return ok, lines


def cmd_verify(args) -> int:
    lib = _library(args)
    net = parse(Path(args.mapped).read_text())
    if net.num_selects:
        print(f"FAIL select inputs remain: {' '.join(net.select_inputs)}")
        return 1
    mapped = MappedNetlist.from_netlist(net)
    tables = parse_sboxes(Path(args.sboxes).read_text()) if args.sboxes else data.bundled_sboxes()
    ok, lines = _verify(mapped, Path(args.manifest).read_text(), tables, lib, mapped.area(lib))
    print("\n".join(lines))
    return 0 if ok else 1


def cmd_bench(args) -> int:
    args.suite_name = args.suite_name or args.suite
    if args.suite_name is None:
        raise SystemExit("error: bench needs a suite name")
    names, functions = data.suite_names(args.suite_name), data.suite(args.suite_name)
    cfg = _ga_config(args)
    lib = _library(args)
    out = _out_dir(args)
    best, history = run_ga(functions, cfg)
    count = args.random_baseline or history.evaluations
    _, areas = random_search(functions, count, cfg.seed, cfg.jobs)
    net, _ = synthesize(build_merged(MergedSpec.of(functions, best)), lib)
    _, result = _map_and_write(names, functions, best, net, lib, out)
    mapped_view = MappedNetlist.from_netlist(parse((out / "mapped.cnl").read_text()))
    ok, lines = _verify(mapped_view, (out / "manifest.txt").read_text(),
                        dict(zip(names, functions)), lib, result.area_ge)
    row = BenchRow.compute(args.suite_name, areas, history.best_ge, result.area_ge)
    _write(out / "assignment.txt", best.to_text())
    _write(out / "history.csv", history.to_csv())
    _write(out / "random_histogram.csv", histogram_csv(areas))
    _write(out / f"bench_{args.suite_name}.csv", BenchRow.HEADER + "\n" + row.to_csv() + "\n")
    print(row.pretty())
    print("\n".join(lines))
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="camosynth", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def functions_args(sp):
        sp.add_argument("names", nargs="*", help="S-box names (default: every record in the file)")
        sp.add_argument("--sboxes", help="S-box file (default: bundled tables)")
        sp.add_argument("--suite", choices=sorted(data.SUITES), help="use a bundled benchmark suite")

    def common(sp, ga=False):
        sp.add_argument("--seed", type=int, default=None, help="master random seed")
        sp.add_argument("--out-dir", default=".", help="directory for output files")
        sp.add_argument("--library", help="cell library override file")
        if ga:
            sp.add_argument("--config", help="GA settings as 'key = value' lines")
            sp.add_argument("--jobs", type=int, default=None, help="parallel fitness workers")
            sp.add_argument("--random-baseline", type=int, nargs="?", const=0, default=None, metavar="N",
                            help="also evaluate N random assignments (default: the GA's evaluation count)")

    sp = sub.add_parser("merge", help="write the merged multiplexer netlist")
    functions_args(sp)
    sp.add_argument("--assignment", help="pin assignment file")
    sp.add_argument("-o", "--output", help="output .cnl file (default: stdout)")
    sp.set_defaults(func=cmd_merge)

    sp = sub.add_parser("optimize", help="search pin assignments with the genetic algorithm")
    functions_args(sp)
    common(sp, ga=True)
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("map", help="map onto camouflaged cells and write certificates")
    functions_args(sp)
    common(sp)
    sp.add_argument("--assignment", help="pin assignment file")
    sp.add_argument("--netlist", help="merged or synthesized .cnl netlist to map")
    sp.set_defaults(func=cmd_map)

    sp = sub.add_parser("verify", help="check every certificate in a doping manifest")
    sp.add_argument("mapped", help="mapped .cnl netlist")
    sp.add_argument("manifest", help="doping manifest")
    sp.add_argument("--sboxes", help="S-box file (default: bundled tables)")
    sp.add_argument("--library", help="cell library override file")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("bench", help="GA, random baseline, mapping and verification for one suite")
    sp.add_argument("suite_name", metavar="suite", nargs="?", choices=sorted(data.SUITES))
    sp.add_argument("--suite", choices=sorted(data.SUITES), help="same as the positional suite")
    common(sp, ga=True)
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
