import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from camosynth.boolfunc import TruthTable
from camosynth.celllib import default_library
from camosynth.data import suite
from camosynth.merge import MergedSpec, build_merged
from camosynth.netlist import function_under_select
from camosynth.synth import synthesize
from camosynth.techmap import Instance, MappedNetlist, PlausibilityCertificate, map_circuit
from camosynth.verify import (
    DEFAULT_LIMIT, CertificateError, EnumerationLimitError, attacker_enumerate,
    cell_word, check_certificate, configuration_count, configured_function, verdict_line,
)
from oracles import bit_tuple, row_of
from strategies import netlists

LIB = default_library()


def pipeline(name):
    spec = MergedSpec.of(suite(name))
    net, _ = synthesize(build_merged(spec))
    return spec, map_circuit(net, LIB, spec)


def naive_configured(m, configs):
    rows = []
    for r in range(1 << m.num_data):
        vals = list(bit_tuple(r, m.num_data))
        for inst, idx in zip(m.instances, configs):
            f = LIB[inst.cell].plausible[idx].bits[0]
            vals.append(f >> row_of([vals[w] for w in inst.fanins]) & 1)
        rows.append(row_of([vals[d] for d in m.drivers]))
    return rows


@given(st.integers(1, 4).flatmap(lambda k: st.tuples(
    st.just(k), st.integers(0, (1 << (1 << k)) - 1),
    st.lists(st.integers(0, 255), min_size=k, max_size=k))))
def test_cell_word_matches_rowwise(case):
    k, bits, words = case
    got = cell_word(bits, words, 0xFF)
    for b in range(8):
        row = sum((w >> b & 1) << i for i, w in enumerate(words))
        assert got >> b & 1 == bits >> row & 1


def nand_circuit():
    return MappedNetlist(("a", "b"), ("y",), (Instance("NAND2", (0, 1), (0, 1)),), (2,))


def test_single_nand_attacker():
    m = nand_circuit()
    not_a = TruthTable.single(2, 0b0101)
    xor = TruthTable.single(2, 0b0110)
    assert attacker_enumerate(m, [not_a, xor]) == [True, False]
    assert configuration_count(m) == 5


def test_nominal_certificate_is_plain_equivalence():
    spec, result = pipeline("present2")
    m = result.mapped
    nominal = tuple(LIB[i.cell].plausible_index(LIB[i.cell].nominal.bits[0]) for i in m.instances)
    visible = m.to_netlist(LIB)
    assert configured_function(m, nominal, LIB) == function_under_select(visible, 0)


@pytest.mark.parametrize("name", ["present4", "present16"])
def test_pipeline_certificates(name):
    spec, result = pipeline(name)
    fs = spec.functions
    for cert in result.certificates:
        perms = spec.assignment.perms(cert.code)
        assert check_certificate(result.mapped, cert, fs[cert.code], perms, LIB)
        assert configured_function(result.mapped, cert.configs, LIB).rows() == \
            naive_configured(result.mapped, cert.configs)


def test_perturbed_certificates_fail():
    spec, result = pipeline("present4")
    rng = np.random.default_rng(7)
    m = result.mapped
    failures = 0
    for _ in range(100):
        code = int(rng.integers(spec.n))
        cert = result.certificates[code]
        j = int(rng.integers(len(m.instances)))
        size = len(LIB[m.instances[j].cell].plausible)
        new = (cert.configs[j] + 1 + int(rng.integers(size - 1))) % size
        configs = cert.configs[:j] + (new,) + cert.configs[j + 1:]
        ok = check_certificate(m, PlausibilityCertificate(code, configs), spec.functions[code],
                               spec.assignment.perms(code), LIB)
        failures += not ok
    assert failures >= 1


def test_malformed_certificates():
    m = nand_circuit()
    f = TruthTable.single(2, 0b0111)
    ident = ((0, 1), (0,))
    with pytest.raises(CertificateError):
        check_certificate(m, PlausibilityCertificate(0, (5,)), f, ident, LIB)
    with pytest.raises(CertificateError):
        check_certificate(m, PlausibilityCertificate(0, (0, 0)), f, ident, LIB)
    with pytest.raises(CertificateError):
        check_certificate(m, PlausibilityCertificate(0, (0,)), TruthTable.single(3, 0), ((0, 1, 2), (0,)), LIB)


def test_attacker_refuses_large_circuits():
    _, result = pipeline("present2")
    assert configuration_count(result.mapped) > DEFAULT_LIMIT
    with pytest.raises(EnumerationLimitError):
        attacker_enumerate(result.mapped, [suite("present2")[0]])


@settings(max_examples=60, deadline=None)
@given(netlists(max_data=3, max_selects=2, max_gates=4, min_selects=1))
def test_certificates_imply_attacker_plausibility(n):
    result = map_circuit(n, LIB)
    assume(configuration_count(result.mapped) <= 5000)
    viable = [function_under_select(n, c.code) for c in result.certificates]
    assert all(attacker_enumerate(result.mapped, viable, limit=5000))


def test_attacker_sees_permuted_function():
    # an AND2 whose pins are read in the other order is the same candidate
    m = MappedNetlist(("a", "b"), ("y",), (Instance("AND2", (1, 0), (0, 1)),), (2,))
    f = TruthTable.single(2, 0b1000)
    assert attacker_enumerate(m, [f]) == [True]


def test_verdict_line():
    assert verdict_line(True, "G0", 12.345) == "PASS G0 12.35"
    assert verdict_line(False, "S1", 1) == "FAIL S1 1.00"
