"""End-to-end acceptance checks, one test per criterion.

Each test records a verdict through ``conftest.record`` before asserting, so
the terminal summary prints one PASS/FAIL line per criterion.
"""

import random
import time

import pytest

from camosynth.boolfunc import TruthTable, cofactor_closure
from camosynth.celllib import default_library
from camosynth.cli import main
from camosynth.data import SUITES, bundled_sboxes, suite
from camosynth.ga import GaConfig, random_search, run_ga
from camosynth.merge import MergedSpec, build_merged
from camosynth.netlist import Gate, Netlist, emit, function_under_select, output_tables, parse
from camosynth.synth import SCRIPT, synthesize
from camosynth.techmap import map_circuit, select_values, split_into_trees, tree_cover
from camosynth.verify import check_certificate, configured_function
from conftest import record
from oracles import brute_closure, brute_min_cost, netlist_rows, random_tree
from test_synth import sop_netlist

LIB = default_library()
SEEDS = (0, 1, 2)
# smaller GA budget for the suites that only feed the mapping comparison
REDUCED = dict(population=30, generations=10)

_runs: dict = {}


def ga_and_random(name, seed, full):
    """Memoised GA run plus the equal-budget random sample."""
    key = (name, seed, full)
    if key not in _runs:
        fs = suite(name)
        cfg = GaConfig(seed=seed) if full else GaConfig(seed=seed, **REDUCED)
        t = time.perf_counter()
        best, history = run_ga(fs, cfg)
        ga_time = time.perf_counter() - t
        t = time.perf_counter()
        _, areas = random_search(fs, history.evaluations, seed)
        _runs[key] = (best, history, areas, ga_time, time.perf_counter() - t)
    return _runs[key]


def pipeline(name, assignment=None):
    spec = MergedSpec.of(suite(name), assignment)
    net, report = synthesize(build_merged(spec), LIB)
    return spec, net, report, map_circuit(net, LIB, spec)


def certificates_ok(spec, result):
    return all(check_certificate(result.mapped, c, spec.functions[c.code],
                                 spec.assignment.perms(c.code), LIB)
               for c in result.certificates) and len(result.certificates) == spec.n


def test_criterion_01_cell_model():
    record(1, False, "did not finish")
    t = time.perf_counter()
    nand2 = TruthTable.single(2, 0b0111)
    fig = {0b0111, 0b0101, 0b0011, 0b0000, 0b1111}
    ok = {f.bits[0] for f in cofactor_closure(nand2)} == fig
    for cell in LIB.cells:
        ok &= {f.bits[0] for f in cell.plausible} == brute_closure(cell.nominal.bits[0], cell.arity)
    elapsed = time.perf_counter() - t
    ok &= elapsed < 1.0 and len(LIB.cells) == 14
    record(1, ok, f"NAND2 closure and 14 cells match brute force in {elapsed:.3f} s")
    assert ok


def test_criterion_02_merge_contract():
    record(2, False, "did not finish")
    checked = 0
    for name in sorted(SUITES):
        spec = MergedSpec.of(suite(name))
        n = build_merged(spec)
        for i, f in enumerate(spec.assignment.apply(spec.functions)):
            assert netlist_rows(n, i) == f.rows(), (name, i)
            checked += 1
    record(2, True, f"{checked} functions across {len(SUITES)} suites match exhaustively")


def test_criterion_03_synthesis_equivalence():
    record(3, False, "did not finish")
    passes = 0
    for name in sorted(SUITES):
        merged = build_merged(MergedSpec.of(suite(name)))

        def check(before, after, pass_name):
            nonlocal passes
            assert after.output_tables() == before.output_tables(), (name, pass_name)
            passes += 1

        net, _ = synthesize(merged, LIB, check=check)
        assert output_tables(net) == output_tables(merged), name
    assert passes == len(SUITES) * len(SCRIPT)
    record(3, True, f"{passes} pass applications equivalent over all input rows")


def test_criterion_04_single_sbox_area():
    record(4, False, "did not finish")
    t = time.perf_counter()
    _, report = synthesize(sop_netlist(bundled_sboxes()["PRESENT"]), LIB)
    elapsed = time.perf_counter() - t
    ok = 20 <= report.area_ge <= 45 and elapsed < 5
    record(4, ok, f"PRESENT S-box {float(report.area_ge):.2f} GE in {elapsed:.2f} s (target 20-45 GE, < 5 s)")
    assert ok


@pytest.mark.parametrize("seed", SEEDS)
def test_criterion_05_ga_dominance(seed):
    if seed == SEEDS[0]:
        record(5, False, "did not finish")
    best, history, areas, ga_time, rand_time = ga_and_random("present8", seed, True)
    ga = history.best_ge
    rbest = min(areas)
    gap = float((rbest - ga) / rbest)
    ok = ga <= rbest and gap >= 0.15 and ga_time < 1800
    line = (f"seed {seed}: GA {float(ga):.2f} vs random best {float(rbest):.2f} "
            f"({history.evaluations} evals), gap {100 * gap:.1f}% (target >= 15%), "
            f"GA {ga_time / 60:.1f} min, random {rand_time / 60:.1f} min")
    prev_ok, prev = _runs.setdefault("c5", (True, []))
    prev.append(line)
    _runs["c5"] = (prev_ok and ok, prev)
    record(5, prev_ok and ok, "; ".join(prev))
    assert ok, line


@pytest.mark.parametrize("name", ["present4", "present8", "present16", "des4", "des8"])
def test_criterion_06_mapping_improvement(name):
    if name == "present4":
        record(6, False, "did not finish")
    # the 20% bar applies at the default budget; the rest only need a positive gain
    full = name in ("present8", "des8")
    best, history, areas, _, _ = ga_and_random(name, 0, full)
    spec, net, report, result = pipeline(name, best)
    ga = report.area_ge
    ga_tm = result.area_ge
    rbest = min(areas)
    improvement = float((rbest - ga_tm) / rbest * 100)
    need = 20.0 if name in ("present8", "des8") else 0.0
    ok = ga_tm < ga and improvement > need and certificates_ok(spec, result)
    line = (f"{name}: random best {float(rbest):.2f}, GA {float(ga):.2f}, GA+TM {float(ga_tm):.2f}, "
            f"improvement {improvement:.1f}% (need > {need:.0f}%)")
    prev_ok, prev = _runs.setdefault("c6", (True, []))
    prev.append(line)
    _runs["c6"] = (prev_ok and ok, prev)
    record(6, prev_ok and ok, "; ".join(prev))
    assert ok, line


@pytest.fixture(scope="module")
def mapped_suites():
    return {name: pipeline(name) for name in sorted(SUITES)}


def test_criterion_07_select_elimination(mapped_suites):
    record(7, False, "did not finish")
    for name, (_, _, _, result) in mapped_suites.items():
        text = emit(result.mapped.to_netlist(LIB))
        assert ".selects" not in text, name
        assert parse(text).num_selects == 0, name
    record(7, True, f"{len(mapped_suites)} mapped netlists carry no select inputs")


def test_criterion_08_plausibility_completeness(mapped_suites):
    record(8, False, "did not finish")
    total = 0
    for name, (spec, _, _, result) in mapped_suites.items():
        assert certificates_ok(spec, result), name
        total += spec.n
    record(8, True, f"{total} certificates verified over {len(mapped_suites)} suites")


def test_criterion_09_dp_optimality():
    record(9, False, "did not finish")
    rng = random.Random(9)
    for i in range(200):
        n = random_tree(rng)
        tree, = split_into_trees(n)
        cover = tree_cover(n, tree, LIB, select_values(n), range(1 << n.num_selects))
        assert cover[tree.root].cost == brute_min_cost(n, tree.root, LIB), i
    record(9, True, "200 random trees: DP cost equals brute-force minimum")


def random_netlist(rng):
    d, s = rng.randint(1, 4), rng.randint(1, 3)
    gates = []
    for g in range(rng.randint(1, 15)):
        kind = rng.choice(("INV", "BUF", "NAND", "NOR", "AND", "OR"))
        arity = 1 if kind in ("INV", "BUF") else rng.randint(2, 4)
        gates.append(Gate(kind, tuple(rng.randrange(d + s + g) for _ in range(arity))))
    total = d + s + len(gates)
    drivers = tuple(rng.randrange(max(0, total - 4), total) for _ in range(rng.randint(1, 3)))
    return Netlist(tuple(f"x{i}" for i in range(d)), tuple(f"s{i}" for i in range(s)),
                   tuple(f"y{j}" for j in range(len(drivers))), tuple(gates), drivers)


def test_criterion_10_feasibility():
    record(10, False, "did not finish")
    rng = random.Random(10)
    for i in range(500):
        n = random_netlist(rng)
        result = map_circuit(n, LIB)
        assert len(result.certificates) == 1 << n.num_selects, i
        for cert in result.certificates:
            got = configured_function(result.mapped, cert.configs, LIB)
            assert got == function_under_select(n, cert.code), i
        assert parse(emit(result.mapped.to_netlist(LIB))).num_selects == 0, i
    record(10, True, "500 random netlists with select wiring mapped without failure")


def test_criterion_11_determinism(tmp_path):
    record(11, False, "did not finish")
    cfg = tmp_path / "ga.cfg"
    cfg.write_text("".join(f"{k} = {v}\n" for k, v in REDUCED.items()))
    outs = []
    for tag, jobs in (("a", 1), ("b", 1), ("c", 2)):
        out = tmp_path / tag
        code = main(["bench", "present4", "--seed", "7", "--config", str(cfg),
                     "--jobs", str(jobs), "--out-dir", str(out)])
        assert code == 0
        outs.append(out)
    files = ("bench_present4.csv", "history.csv", "random_histogram.csv")
    same = all((outs[0] / f).read_bytes() == (o / f).read_bytes() for o in outs[1:] for f in files)
    record(11, same, "bench present4 --seed 7: CSV outputs byte-identical over 2 runs and --jobs 1/2")
    assert same
