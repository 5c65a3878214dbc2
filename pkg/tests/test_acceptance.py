"""End-to-end acceptance criteria, one test per criterion.

Each test records a single pass/fail line; conftest prints them at the end
of the run.
"""

from __future__ import annotations

import hashlib
import io
import subprocess
import time
from contextlib import contextmanager
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpp2rust import diffbench as D
from cpp2rust import fuzz
from cpp2rust.cli import RunConfig, run_pipeline
from cpp2rust.frontend import merge_units, parse_source
from cpp2rust.mapping import lower_unit
from cpp2rust.mapping.overloads import overload_names
from cpp2rust.target import emit_unit, validate_target

from support import BOOL_ARRAY, CORPUS, EXPECTED_STDOUT, FIXTURES, fence_count, transpile

RESULTS: dict[int, str] = {}


@contextmanager
def criterion(n: int, title: str):
    try:
        yield
    except BaseException:
        RESULTS[n] = f"criterion {n} FAIL: {title}"
        print(RESULTS[n])
        raise
    RESULTS[n] = f"criterion {n} PASS: {title}"
    print(RESULTS[n])


def pipeline(inputs, out_dir: Path) -> int:
    sink = io.StringIO()
    return run_pipeline(RunConfig(inputs=list(inputs), out_dir=out_dir), err=sink, out=sink)


@pytest.mark.toolchain
def test_criterion_1_corpus_differential(tmp_path):
    with criterion(1, "corpus programs validate, compile and match the source binaries"):
        start = time.monotonic()
        out = tmp_path / "out"
        sources = [CORPUS / name for name in EXPECTED_STDOUT]
        assert pipeline(sources, out) == 0
        for src in sources:
            rs = out / f"{src.stem}.rs"
            assert validate_target(rs.read_text()) == [], src.name
            v = D.run_differential(src, rs, work_dir=tmp_path / "build")
            assert v.status == "match", (src.name, v.status, v.detail)
            assert v.target_stdout == EXPECTED_STDOUT[src.name], src.name
        assert time.monotonic() - start < 60


@pytest.mark.toolchain
def test_criterion_2_bool_array_behaviour(tmp_path):
    with criterion(2, "merged bool-array compiles; set_bit gives false, true, then false after clear"):
        out = tmp_path / "out"
        assert pipeline(BOOL_ARRAY, out) == 0
        module = out / "bool-array.rs"
        assert validate_target(module.read_text()) == []
        driver = tmp_path / "driver.rs"
        template = (FIXTURES / "bool_array_driver.rs").read_text()
        driver.write_text(template.replace("{module}", str(module)))
        exe = tmp_path / "driver"
        build = subprocess.run(["rustc", "--edition", "2021", str(driver), "-o", str(exe)],
                               capture_output=True, text=True)
        assert build.returncode == 0, build.stderr
        run = subprocess.run([str(exe)], capture_output=True, text=True, timeout=30)
        assert run.returncode == 0
        assert run.stdout.split() == ["false", "true", "false"]


def test_criterion_3_no_unsafe_tokens():
    with criterion(3, "no unsafe, *const or *mut over the corpus and 200 fuzzed programs"):
        texts = {}
        for p in sorted(CORPUS.glob("*.c*")):
            texts[p.name] = transpile(p.read_text(), p.stem, p.name)[0]
        parts = [parse_source(p.read_text(), "bool-array", str(p)) for p in BOOL_ARRAY]
        target, _ = lower_unit(merge_units(*parts))
        assert not target.has_unsafe()
        texts["bool-array"] = emit_unit(target)
        for seed in range(200):
            name, src = fuzz.generate(seed)
            unit = merge_units(parse_source(src, name.split(".")[0], name), strict=False)
            target, _ = lower_unit(unit)
            assert not target.has_unsafe(), name
            texts[name] = emit_unit(target)
        assert len(texts) == 205
        bad = {k: validate_target(t) for k, t in texts.items() if validate_target(t)}
        assert bad == {}


def test_criterion_4_coverage_metric():
    with criterion(4, "9 supported + 1 template gives 90.0 and one fence; full gives 100.0; empty gives 100.0"):
        text, ledger, entry = transpile((FIXTURES / "nine_plus_template.cpp").read_text(), "nine")
        assert (entry.total, entry.converted) == (10, 9)
        assert entry.percent == 90.0
        assert fence_count(text) == 1
        for p in sorted(CORPUS.glob("*.c*")):
            text, _, entry = transpile(p.read_text(), p.stem, p.name)
            assert entry.percent == 100.0 and fence_count(text) == 0, p.name
        text, ledger, entry = transpile((FIXTURES / "empty.c").read_text(), "empty", "empty.c")
        assert entry.percent == 100.0 and ledger == [] and text == ""


def _digest(d: Path) -> dict:
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(d.iterdir())}


def test_criterion_5_determinism(tmp_path):
    with criterion(5, "two runs produce byte-identical .rs files and reports"):
        inputs = [CORPUS, FIXTURES / "nine_plus_template.cpp", FIXTURES / "instances.cpp"]
        pipeline(inputs, tmp_path / "a")
        pipeline(inputs, tmp_path / "b")
        a, b = _digest(tmp_path / "a"), _digest(tmp_path / "b")
        assert {"report.json", "report.txt", "bool-array.rs", "Catalan.rs"} <= set(a)
        assert a == b


TYPES = ["i32", "u32", "f32", "f64", "bool", "u8", "&str", "&mut i32", "Vec<u32>", "i64"]
signature_sets = st.lists(st.lists(st.sampled_from(TYPES), max_size=4).map(tuple), min_size=1, max_size=6, unique=True)

C_TYPES = {"i32": "int", "u32": "unsigned int", "f32": "float", "f64": "double", "i64": "long", "u8": "char"}
c_sets = st.lists(st.lists(st.sampled_from(sorted(C_TYPES)), max_size=3).map(tuple), min_size=1, max_size=4, unique=True)


@settings(max_examples=300, deadline=None)
@given(signature_sets)
def _overload_map_property(sigs):
    names = overload_names("f", sigs)
    assert len(names) == len(sigs)
    assert len(set(names)) == len(names)
    if len(sigs) == 1:
        assert names == ["f"]
    assert overload_names("f", sigs) == names


@settings(max_examples=40, deadline=None)
@given(c_sets)
def _source_overload_property(sigs):
    lines = []
    for sig in sigs:
        params = ", ".join(f"{C_TYPES[t]} p{i}" for i, t in enumerate(sig)) or "void"
        lines.append(f"int f({params}) {{ return 0; }}")
    src = "\n".join(lines) + "\nint g(int a) { return a; }\n"
    first = transpile(src, "ov")[0]
    names = [ln.split("fn ", 1)[1].split("(")[0] for ln in first.split("\n") if "fn f" in ln]
    assert len(names) == len(sigs) and len(set(names)) == len(names)
    if len(sigs) == 1:
        assert names == ["f"]
    assert "pub fn g(a: i32)" in first
    assert transpile(src, "ov")[0] == first


def test_criterion_6_overload_renaming():
    with criterion(6, "overload map is injective per set, identity on singletons, stable"):
        _overload_map_property()
        _source_overload_property()


def test_criterion_7_bench_harness():
    with criterion(7, "injected [3, 5] gives 4.0; default repeats 10; table row bool-array 2.0 6.3 6.5"):
        durations = iter([3, 5])
        assert D.measure_runtime(["prog"], repeats=2, timer=lambda c: next(durations)) == 4.0
        calls = []
        D.measure_runtime(["prog"], timer=lambda c: calls.append(c) or 0.0)
        assert len(calls) == 10
        records = [D.BenchRecord("bool-array", m, v, 10) for m, v in zip(D.MODES, (2, 6.3, 6.5))]
        lines = D.render_bench_table(records).split("\n")
        assert lines[0] == "program target-release source-no-opt source-o1"
        assert lines[1] == "bool-array 2.0 6.3 6.5"
