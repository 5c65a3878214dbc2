from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cpp2rust.coverage import (ConversionReport, FileEntry, compute_report, line_coverage,
                               parse_json_report, percent_text, render_report)
from cpp2rust.errors import ReportFormatError
from cpp2rust.mapping.ledger import converted, unconverted

from support import CORPUS, FIXTURES, transpile


def ledger(n_ok, n_bad):
    return [converted(f"c{i}", "r") for i in range(n_ok)] + \
           [unconverted(f"u{i}", "region", "template") for i in range(n_bad)]


def test_ninety_percent():
    e = compute_report(ledger(9, 1), "t")
    assert (e.total, e.converted, e.percent) == (10, 9, 90.0)
    assert len(e.diagnostics) == 1 and e.diagnostics[0].severity == "unconverted"


def test_empty_ledger_is_complete():
    e = compute_report([], "empty")
    assert e.percent == 100.0 and e.diagnostics == []


def test_fibonacci_is_complete():
    text, led, e = transpile((CORPUS / "Fibonacci.c").read_text(), "Fibonacci", "Fibonacci.c")
    assert e.percent == 100.0 and "UNCONVERTED" not in text


@given(st.integers(0, 50), st.integers(0, 50))
def test_percent_bounds_and_counts(ok, bad):
    e = compute_report(ledger(ok, bad), "p")
    assert 0.0 <= e.percent <= 100.0
    assert e.converted <= e.total
    assert (e.percent == 100.0) == (bad == 0)


def test_table_single_entry_has_three_lines():
    report = ConversionReport([compute_report(ledger(9, 1), "t")])
    lines = render_report(report, "table").rstrip("\n").split("\n")
    assert len(lines) == 3
    assert lines[0].split() == ["File", "Percent", "Remarks"]
    assert set(lines[1]) == {"-"}
    assert lines[2].split()[:3] == ["t", "90.0", "template"]


def test_json_key_order():
    report = ConversionReport([compute_report(ledger(2, 1), "t")])
    (doc,) = json.loads(render_report(report, "json"))
    assert list(doc) == ["file", "total", "converted", "percent", "diagnostics"]
    assert list(doc["diagnostics"][0]) == ["severity", "rule_id", "file", "line", "message"]


def test_rows_sorted_by_stem():
    entries = [compute_report(ledger(1, 0), s) for s in ("ternary", "bool-array", "keyword-list")]
    rows = render_report(ConversionReport(entries), "table").split("\n")[2:5]
    assert [r.split()[0] for r in rows] == ["bool-array", "keyword-list", "ternary"]


def test_unknown_format():
    with pytest.raises(ReportFormatError):
        render_report(ConversionReport(), "yaml")


@given(st.lists(st.tuples(st.integers(0, 20), st.integers(0, 20)), max_size=5))
def test_json_round_trip(specs):
    report = ConversionReport([compute_report(ledger(a, b), f"f{i}") for i, (a, b) in enumerate(specs)])
    back = parse_json_report(render_report(report, "json"))
    assert [(e.file, e.total, e.converted, e.percent) for e in back.entries] == \
           [(e.file, e.total, e.converted, e.percent) for e in report.sorted()]


def test_percent_text_truncates():
    assert percent_text(100.0) == "100.0"
    assert percent_text(99.99) == "99.9"
    assert percent_text(90.0) == "90.0"
    assert percent_text(100 * 2 / 3) == "66.6"


def test_line_coverage_counts_fenced_lines():
    text, _, _ = transpile((FIXTURES / "nine_plus_template.cpp").read_text(), "n")
    assert 0 < line_coverage(text) < 100
    assert line_coverage("") == 100.0


def test_diagnostic_points_at_source_line():
    _, _, e = transpile((FIXTURES / "nine_plus_template.cpp").read_text(), "n", "n.cpp")
    (d,) = e.diagnostics
    assert (d.file, d.line, d.rule_id) == ("n.cpp", 5, "template")
    assert d.render().startswith("unconverted:n.cpp:5: ")


def test_file_entry_dict_omits_line_estimate():
    e = FileEntry("x", 1, 1, 100.0, line_percent=50.0)
    assert "line_percent" not in e.to_dict()
