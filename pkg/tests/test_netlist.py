import pytest
from hypothesis import given, settings

from camosynth.data import suite
from camosynth.merge import MergedSpec, build_merged
from camosynth.netlist import (
    Gate, Netlist, NetlistBuilder, NetlistError, emit, function_under_select,
    output_tables, parse, simulate,
)
from oracles import bit_tuple, eval_netlist, netlist_rows, row_of
from strategies import netlists


def passthrough():
    return Netlist(("a",), (), ("y",), (), (0,))


def test_passthrough():
    n = passthrough()
    assert simulate(n, 1) == 1
    assert simulate(n, 0) == 0


def test_simulate_range_check():
    with pytest.raises(NetlistError):
        simulate(passthrough(), 2)


def test_builder_shares_gates():
    b = NetlistBuilder(["a", "b"])
    w1 = b.add("NAND", 0, 1)
    w2 = b.add("NAND", 0, 1)
    w3 = b.add("NAND", 0, 1, share=False)
    assert w1 == w2 != w3
    b.output("y", w3)
    assert simulate(b.build(), 3) == 0


@settings(max_examples=200)
@given(netlists(mux=True))
def test_simulate_matches_naive(n):
    for r in range(1 << n.num_data):
        for s in range(1 << n.num_selects):
            want = row_of(eval_netlist(n, bit_tuple(r, n.num_data), bit_tuple(s, n.num_selects)))
            assert simulate(n, r, s) == want


@settings(max_examples=100)
@given(netlists(mux=True))
def test_bit_parallel_views_agree(n):
    tables = output_tables(n)
    for s in range(1 << n.num_selects):
        f = function_under_select(n, s)
        assert f.rows() == netlist_rows(n, s)
        for r in range(1 << n.num_data):
            row = r | s << n.num_data
            assert [t >> row & 1 for t in tables] == [f.rows()[r] >> j & 1 for j in range(len(tables))]


@settings(max_examples=200)
@given(netlists(mux=True))
def test_emit_parse_roundtrip(n):
    assert parse(emit(n)) == n


def test_roundtrip_merged_present2():
    n = build_merged(MergedSpec.of(suite("present2")))
    text = emit(n, header="merged")
    assert text.startswith("# merged\n")
    assert parse(text) == n


def test_parse_reorders_topologically():
    text = """
    .inputs a b
    .outputs y
    .gate INV y = t
    .gate NAND2 t = a b
    .end
    """
    n = parse(text)
    assert n.gates == (Gate("NAND", (0, 1)), Gate("INV", (2,)))
    assert [simulate(n, r) for r in range(4)] == [0, 0, 0, 1]


def test_parse_mux_pin_order():
    n = parse(".inputs a b\n.selects s\n.outputs y\n.gate MUX2 y = a b s\n.end\n")
    assert simulate(n, 0b01, 0) == 1
    assert simulate(n, 0b01, 1) == 0


def test_parse_assign():
    n = parse(".inputs a\n.outputs y z\n.gate INV t = a\n.assign y = a\n.assign z = t\n.end\n")
    assert n.drivers == (0, 1)


@pytest.mark.parametrize("text,needle", [
    (".inputs a\n.outputs y\n.gate INV y = q\n", "undefined wire 'q'"),
    (".inputs a\n.selects a\n.outputs y\n.gate INV y = a\n", "both data and select"),
    (".inputs a\n.outputs y\n.gate INV y = t\n.gate INV t = y\n", "cycle"),
    (".inputs a\n.outputs y\n.gate INV y = a\n.gate BUF y = a\n", "more than one driver"),
    (".inputs a\n.outputs y\n.gate XOR2 y = a a\n", "line 3"),
    (".inputs a\n.outputs y\n.gate NAND2 y = a\n", "expects 2 inputs"),
    (".inputs a\n.outputs y z\n.gate INV y = a\n", "'z' has no driver"),
    (".inputs a\n.outputs y\n.bogus\n", "line 3"),
    (".inputs a\n.outputs y\n.assign y = a\n.end\n.assign y = a\n", "after .end"),
])
def test_parse_errors(text, needle):
    with pytest.raises(NetlistError, match=needle):
        parse(text)


def test_constructor_rejects_forward_reference():
    with pytest.raises(NetlistError):
        Netlist(("a",), (), ("y",), (Gate("INV", (1,)),), (1,))
