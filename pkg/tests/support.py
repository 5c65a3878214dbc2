"""Helpers shared by the test modules."""

from __future__ import annotations

import shutil
from pathlib import Path

from cpp2rust.coverage import compute_report
from cpp2rust.frontend import merge_units, parse_source
from cpp2rust.mapping import LoweringConfig, lower_unit
from cpp2rust.target import emit_unit

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
FIXTURES = Path(__file__).resolve().parent / "fixtures"
GPERF = CORPUS / "gperf"
BOOL_ARRAY = [GPERF / "bool-array.h", GPERF / "bool-array.icc", GPERF / "bool-array.cc"]

EXPECTED_STDOUT = {
    "Fibonacci.c": b"34",
    "LinkedList.c": b" 1 2 3",
    "Catalan.cpp": b"1 1 2 5 14 42 132 429 1430 4862 ",
    "Constructors.cpp": (b"Default Constructor called\nGeek id is: -1\n"
                         b"Parameterized Constructor called \nGeek id is: 21\n"),
}


def have_toolchain() -> bool:
    return all(shutil.which(t) for t in ("rustc", "gcc", "g++"))


def transpile(source: str, name: str = "t", file: str = "t.cpp", config: LoweringConfig | None = None):
    """(rust text, ledger, report entry) for one source text."""
    unit = merge_units(parse_source(source, name, file), strict=False)
    target, ledger = lower_unit(unit, config)
    return emit_unit(target), ledger, compute_report(ledger, name)


def transpile_bool_array(config: LoweringConfig | None = None):
    parts = [parse_source(p.read_text(encoding="latin-1"), "bool-array", str(p)) for p in BOOL_ARRAY]
    target, ledger = lower_unit(merge_units(*parts), config)
    return emit_unit(target), ledger, compute_report(ledger, "bool-array")


def fence_count(text: str) -> int:
    return sum(1 for ln in text.split("\n") if ln.strip().startswith("// [UNCONVERTED:"))
