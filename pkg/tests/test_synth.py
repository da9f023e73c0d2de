import pytest
from hypothesis import given, settings

from camosynth.celllib import default_library
from camosynth.data import SUITES, bundled_sboxes, suite
from camosynth.merge import MergedSpec, PinAssignment, build_merged
from camosynth.netlist import Gate, Netlist, NetlistBuilder, output_tables
from camosynth.synth import (
    SCRIPT, Aig, aig_to_gates, balance, netlist_to_aig, refactor, rewrite,
    synth_area, synth_script, synthesize,
)
from camosynth.synth.passes import isop
from oracles import bit_tuple, eval_netlist
from strategies import aigs, netlists

LIB = default_library()


def aig_rows(aig):
    """Row-by-row evaluation of every output, independent of node_tables."""
    out = []
    for r in range(1 << aig.num_pis):
        val = [0] + [r >> i & 1 for i in range(aig.num_pis)]
        for n in range(aig.num_pis + 1, aig.num_nodes):
            a, b = aig.fanin0[n], aig.fanin1[n]
            val.append((val[a >> 1] ^ (a & 1)) & (val[b >> 1] ^ (b & 1)))
        out.append(tuple(val[l >> 1] ^ (l & 1) for l in aig.outputs))
    return out


def netlist_all_rows(n):
    rows = []
    for r in range(1 << n.num_inputs):
        bits = bit_tuple(r, n.num_inputs)
        rows.append(tuple(eval_netlist(n, bits[:n.num_data], bits[n.num_data:])))
    return rows


def single_gate(kind, arity):
    b = NetlistBuilder([f"x{i}" for i in range(arity)])
    b.output("y", b.add(kind, *range(arity)))
    return b.build()


def test_nand2_is_one_complemented_and():
    aig = netlist_to_aig(single_gate("NAND", 2))
    assert aig.and_count() == 1
    assert aig.outputs[0] & 1 == 1


def test_mux_front_end():
    n = Netlist(("a", "b"), ("s",), ("y",), (Gate("MUX2", (0, 1, 2)),), (3,))
    aig = netlist_to_aig(n)
    assert aig.and_count() <= 3
    assert aig_rows(aig) == netlist_all_rows(n)


@settings(max_examples=150, deadline=None)
@given(netlists(mux=True))
def test_front_end_equivalence(n):
    assert aig_rows(netlist_to_aig(n)) == netlist_all_rows(n)


def test_strash():
    aig = Aig(2)
    a, b = aig.pi(0), aig.pi(1)
    assert aig.and_(a, b) == aig.and_(b, a)
    assert aig.and_(a, a) == a
    assert aig.and_(a, a ^ 1) == 0
    assert aig.and_(a, 1) == a


def test_rewrite_idempotent_and():
    aig = Aig(1)
    a = aig.pi(0)
    aig.outputs = [aig.and_(a, a)]
    assert rewrite(aig).outputs == [a]


def test_balance_chain():
    aig = Aig(5)
    acc = aig.pi(0)
    for i in range(1, 5):
        acc = aig.and_(acc, aig.pi(i))
    aig.outputs = [acc]
    assert aig.depth() == 4
    out = balance(aig)
    assert out.depth() <= 3
    assert aig_rows(out) == aig_rows(aig)


@settings(max_examples=150, deadline=None)
@given(aigs())
def test_passes_preserve_function(aig):
    want = aig_rows(aig)
    before = aig.and_count()
    r = rewrite(aig)
    assert aig_rows(r) == want
    assert r.and_count() <= before
    b = balance(aig)
    assert aig_rows(b) == want
    assert b.and_count() <= before
    assert b.depth() <= aig.depth()
    f = refactor(aig)
    assert aig_rows(f) == want
    assert f.and_count() <= before


@settings(max_examples=150, deadline=None)
@given(aigs(max_pis=4))
def test_isop_bounds(aig):
    k = aig.num_pis
    on = aig.output_tables()[0]
    upper = on | aig.output_tables()[-1]
    cubes, func = isop(on, upper, k)
    rows = 0
    for r in range(1 << k):
        if any(all((r >> i & 1) for i in range(k) if pos >> i & 1)
               and not any((r >> i & 1) for i in range(k) if neg >> i & 1)
               for pos, neg in cubes):
            rows |= 1 << r
    assert rows == func
    assert on & ~func == 0
    assert func & ~upper == 0


def test_script_schedule():
    assert SCRIPT == ("balance", "rewrite", "refactor", "balance", "rewrite", "rewrite", "balance")


def test_synth_script_is_deterministic():
    n = build_merged(MergedSpec.of(suite("present4")))
    a = synth_script(netlist_to_aig(n))
    b = synth_script(netlist_to_aig(n))
    assert a.structure() == b.structure()


def test_script_converges():
    n = build_merged(MergedSpec.of(suite("present8")))
    once = synth_script(netlist_to_aig(n))
    twice = synth_script(once)
    assert abs(twice.and_count() - once.and_count()) < 0.02 * once.and_count()


def test_refactor_monotone_on_present8():
    aig = netlist_to_aig(build_merged(MergedSpec.of(suite("present8"))))
    assert refactor(aig).and_count() <= aig.and_count()


@pytest.mark.parametrize("name", sorted(SUITES))
def test_every_pass_equivalent_on_suites(name):
    n = build_merged(MergedSpec.of(suite(name)))
    seen = []

    def check(before, after, pass_name):
        assert after.output_tables() == before.output_tables(), pass_name
        seen.append(pass_name)

    net, report = synthesize(n, LIB, check=check)
    assert tuple(seen) == SCRIPT
    assert output_tables(net) == output_tables(n)


def test_nand3_cover():
    aig = netlist_to_aig(single_gate("NAND", 3))
    net, report = aig_to_gates(aig, LIB)
    assert [g.type_name for g in net.gates] == ["NAND3"]
    assert float(report.area_ge) == pytest.approx(1.33)


def test_literal_outputs():
    aig = Aig(2)
    aig.outputs = [aig.pi(0), aig.pi(1) ^ 1]
    net, _ = aig_to_gates(aig, LIB)
    assert sorted(g.type_name for g in net.gates) == ["BUF", "INV"]


@settings(max_examples=150, deadline=None)
@given(aigs())
def test_cover_equivalence_and_report(aig):
    net, report = aig_to_gates(aig, LIB)
    assert [r for r in netlist_all_rows(net)] == aig_rows(aig)
    assert all(g.kind != "MUX2" and g.arity <= 4 for g in net.gates)
    assert report.area_ge == sum(LIB.gate_cell(g.kind, g.arity).area_ge for g in net.gates)
    assert sum(report.gate_count.values()) == len(net.gates)


def sop_netlist(f):
    """Select-free two-level netlist of a multi-output table."""
    m = f.num_inputs
    b = NetlistBuilder([f"x{i}" for i in range(m)])
    inv = [b.add("INV", i) for i in range(m)]
    for j, bits in enumerate(f.bits):
        terms = [b.add("AND", *[i if r >> i & 1 else inv[i] for i in range(m)])
                 for r in range(1 << m) if bits >> r & 1]
        b.output(f"y{j}", b.add("OR", *terms))
    return b.build()


def test_single_present_sbox_area():
    net, report = synthesize(sop_netlist(bundled_sboxes()["PRESENT"]))
    assert net.num_selects == 0
    assert 20 <= report.area_ge <= 45


def test_identical_pair_shares_everything():
    f = bundled_sboxes()["PRESENT"]
    single = synthesize(sop_netlist(f))[1].area_ge
    pair = synth_area([f, f])
    assert pair < 2 * single
    assert pair <= single + 2


def test_report_text():
    _, report = synthesize(build_merged(MergedSpec.of(suite("present2"))))
    text = report.to_text()
    assert text.startswith("area_ge = ")
    assert "pass.7.balance" in text


def test_any_shared_relabeling_keeps_contract():
    fs = suite("present2")
    a = PinAssignment(4, 4, ((3, 1, 2, 0),), ((1, 0, 3, 2),))
    n = build_merged(MergedSpec.of(fs, a))
    net, _ = synthesize(n)
    assert output_tables(net) == output_tables(n)
