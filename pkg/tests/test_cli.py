import shutil
import subprocess
from fractions import Fraction

import pytest

from camosynth.cli import BenchRow, main
from camosynth.data import suite
from camosynth.netlist import function_under_select, parse

SMALL = "population = 8\ngenerations = 3\n"


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "ga.cfg"
    path.write_text(SMALL)
    return str(path)


def test_merge_to_stdout(capsys):
    assert main(["merge", "--suite", "present2"]) == 0
    n = parse(capsys.readouterr().out)
    assert n.num_selects == 1
    fs = suite("present2")
    assert function_under_select(n, 1) == fs[1]


def test_merge_names_and_assignment(tmp_path):
    a = tmp_path / "a.txt"
    a.write_text("0 in=0,1,2,3 out=0,1,2,3\n1 in=1,0,2,3 out=0,1,2,3\n")
    out = tmp_path / "m.cnl"
    assert main(["merge", "G3", "PRESENT", "--assignment", str(a), "-o", str(out)]) == 0
    assert parse(out.read_text()).num_selects == 1


def test_unknown_name():
    with pytest.raises(SystemExit):
        main(["merge", "G3", "NOPE"])


def test_optimize_map_verify(tmp_path, small_config, capsys):
    out = tmp_path / "run"
    assert main(["optimize", "--suite", "present2", "--seed", "3", "--config", small_config,
                 "--out-dir", str(out), "--random-baseline", "5"]) == 0
    for name in ("assignment.txt", "history.csv", "random_histogram.csv"):
        assert (out / name).exists()
    assert sum(int(l.split(",")[1]) for l in (out / "random_histogram.csv").read_text().splitlines()[1:]) == 5
    assert main(["map", "--suite", "present2", "--assignment", str(out / "assignment.txt"),
                 "--out-dir", str(out)]) == 0
    mapped = (out / "mapped.cnl").read_text()
    assert ".selects" not in mapped
    capsys.readouterr()
    assert main(["verify", str(out / "mapped.cnl"), str(out / "manifest.txt")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [l.split()[:2] for l in lines] == [["PASS", "G0"], ["PASS", "G1"]]


def test_map_from_netlist(tmp_path):
    merged = tmp_path / "m.cnl"
    assert main(["merge", "--suite", "present2", "-o", str(merged)]) == 0
    assert main(["map", "--suite", "present2", "--netlist", str(merged), "--out-dir", str(tmp_path)]) == 0
    assert main(["verify", str(tmp_path / "mapped.cnl"), str(tmp_path / "manifest.txt")]) == 0


def test_verify_detects_tampering(tmp_path, capsys):
    assert main(["map", "--suite", "present2", "--out-dir", str(tmp_path)]) == 0
    manifest = tmp_path / "manifest.txt"
    lines = manifest.read_text().splitlines()
    # swap the configurations of the two functions
    first = lines.index("end")
    a = lines[2:first]
    b = lines[first + 2:-1]
    changed = [x for x, y in zip(a, b) if x != y]
    assert changed
    swapped = lines[:2] + b + lines[first:first + 2] + a + [lines[-1]]
    manifest.write_text("\n".join(swapped) + "\n")
    capsys.readouterr()
    assert main(["verify", str(tmp_path / "mapped.cnl"), str(manifest)]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_missing_file_is_an_error(tmp_path):
    assert main(["verify", str(tmp_path / "no.cnl"), str(tmp_path / "no.txt")]) == 2


def bench(tmp_path, tag, config, jobs):
    out = tmp_path / tag
    code = main(["bench", "present4", "--seed", "7", "--config", config, "--jobs", str(jobs),
                 "--out-dir", str(out)])
    assert code == 0
    return out


def test_bench_is_deterministic(tmp_path, small_config):
    a = bench(tmp_path, "a", small_config, 1)
    b = bench(tmp_path, "b", small_config, 1)
    c = bench(tmp_path, "c", small_config, 2)
    for name in ("bench_present4.csv", "history.csv", "random_histogram.csv", "manifest.txt", "mapped.cnl"):
        assert (a / name).read_bytes() == (b / name).read_bytes() == (c / name).read_bytes()
    header, row = (a / "bench_present4.csv").read_text().splitlines()
    assert header == BenchRow.HEADER
    parsed = BenchRow.from_csv(row)
    assert parsed.to_csv() == row
    assert parsed.ga_tm_ge <= parsed.ga_ge


def test_bench_requires_suite():
    with pytest.raises(SystemExit):
        main(["bench", "present5"])


def test_benchrow_formula():
    row = BenchRow.compute("x", [Fraction(10), Fraction(20)], Fraction(9), Fraction(8))
    assert (row.random_avg_ge, row.random_best_ge, row.ga_ge, row.ga_tm_ge) == (15, 10, 9, 8)
    assert row.improvement_pct == 20
    assert "impr" in row.pretty()
    with pytest.raises(ValueError):
        BenchRow.from_csv("x,1,2")


@pytest.mark.skipif(shutil.which("camosynth") is None, reason="console script not installed")
def test_console_script():
    done = subprocess.run(["camosynth", "--help"], capture_output=True, text=True)
    assert done.returncode == 0
    assert "bench" in done.stdout
