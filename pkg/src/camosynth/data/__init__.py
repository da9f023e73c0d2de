"""Bundled S-box tables and the benchmark suites built from them."""

from __future__ import annotations

from importlib import resources

from ..boolfunc import TruthTable, parse_sboxes

FILES = ("present.txt", "des.txt")

# suite name -> (file, number of leading functions taken in file order)
SUITES = {
    "present2": ("present.txt", 2),
    "present4": ("present.txt", 4),
    "present8": ("present.txt", 8),
    "present16": ("present.txt", 16),
    "des2": ("des.txt", 2),
    "des4": ("des.txt", 4),
    "des8": ("des.txt", 8),
}


def read_text(name: str) -> str:
    return resources.files(__name__).joinpath(name).read_text(encoding="ascii")


def bundled_sboxes() -> dict[str, TruthTable]:
    tables: dict[str, TruthTable] = {}
    for name in FILES:
        tables.update(parse_sboxes(read_text(name)))
    return tables


def suite(name: str) -> list[TruthTable]:
    try:
        fname, n = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}") from None
    tables = list(parse_sboxes(read_text(fname)).items())
    return [t for _, t in tables[:n]]


def suite_names(name: str) -> list[str]:
    fname, n = SUITES[name]
    return list(parse_sboxes(read_text(fname)))[:n]
