from __future__ import annotations

import math
import shutil
import sys
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cpp2rust import diffbench as D
from cpp2rust.errors import BenchTableError, MeasurementError, ToolchainMissingError

from support import CORPUS, transpile


def fake_timer(values):
    it = iter(values)
    return lambda command: next(it)


def test_injected_mean():
    assert D.measure_runtime(["x"], repeats=2, timer=fake_timer([3, 5])) == 4.0


def test_default_repeats_is_ten():
    calls = []
    D.measure_runtime(["x"], timer=lambda c: calls.append(c) or 1.0)
    assert D.DEFAULT_REPEATS == 10 and len(calls) == 10


@given(st.lists(st.floats(0, 1e4, allow_nan=False), min_size=1, max_size=30))
def test_mean_is_exact(ds):
    got = D.measure_runtime(["x"], repeats=len(ds), timer=fake_timer(ds))
    assert got == sum(ds) / len(ds)


def test_zero_repeats():
    with pytest.raises(ValueError):
        D.measure_runtime(["x"], repeats=0, timer=lambda c: 1.0)


def test_discard_first():
    assert D.measure_runs(["x"], repeats=2, timer=fake_timer([100, 3, 5]), discard_first=True) == [3.0, 5.0]


def test_failing_run_carries_index():
    def timer(c, n=[0]):
        n[0] += 1
        if n[0] == 3:
            raise RuntimeError("exit status 1")
        return 1.0
    with pytest.raises(MeasurementError) as exc:
        D.measure_runtime(["x"], repeats=5, timer=timer)
    assert exc.value.run_index == 2


def test_runs_are_sequential():
    events = []

    def probe(command):
        events.append(("start", len(events)))
        events.append(("end", len(events)))
        return 1.0
    D.measure_runs(["x"], repeats=4, timer=probe)
    assert [e[0] for e in events] == ["start", "end"] * 4


def test_real_noop_program():
    mean = D.measure_runtime([sys.executable, "-c", "pass"], repeats=3)
    assert mean >= 0 and math.isfinite(mean)


def test_nonzero_exit_is_measurement_error():
    with pytest.raises(MeasurementError) as exc:
        D.measure_runtime([sys.executable, "-c", "raise SystemExit(3)"], repeats=2)
    assert exc.value.run_index == 0


# --------------------------------------------------------------- table


def rec(stem, means):
    return [D.BenchRecord(stem, m, v, 10) for m, v in zip(D.MODES, means)]


def test_table_row_format():
    text = D.render_bench_table(rec("bool-array", [2, 6.3, 6.5]))
    assert text.split("\n")[1] == "bool-array 2.0 6.3 6.5"


def test_table_header_only():
    assert D.render_bench_table([]) == "program target-release source-no-opt source-o1\n"


def test_table_two_stems_sorted():
    rows = D.render_bench_table(rec("zeta", [1, 2, 3]) + rec("alpha", [4, 5, 6])).split("\n")[1:3]
    assert [r.split()[0] for r in rows] == ["alpha", "zeta"]


def test_table_inconsistent_modes():
    with pytest.raises(BenchTableError):
        D.render_bench_table(rec("a", [1, 2, 3]) + rec("b", [1, 2]))


def test_bench_record_validation():
    with pytest.raises(ValueError):
        D.BenchRecord("a", "source-o1", 1.0, 0)
    with pytest.raises(ValueError):
        D.BenchRecord("a", "source-o1", -1.0, 1)


def test_raw_csv():
    text = D.raw_csv([("a", "source-o1", 0, 1.5)])
    assert text == "stem,mode,run,ms\na,source-o1,0,1.500\n"


# -------------------------------------------------------------- config


def test_load_commands(tmp_path):
    cfg = tmp_path / "bench.ini"
    cfg.write_text("source-o1 = clang -O1 {input} -o {output}\n")
    cmds = D.load_commands(cfg)
    assert cmds["source-o1"].startswith("clang") and cmds["target-release"] == D.DEFAULT_COMMANDS["target-release"]
    cfg.write_text("turbo = cc {input}\n")
    with pytest.raises(ValueError):
        D.load_commands(cfg)


def test_expand_placeholders():
    argv = D.expand("{cc} -O1 {input} -o {output}", Path("a.c"), Path("/t/a"))
    assert argv == ["gcc", "-O1", "a.c", "-o", "/t/a"]
    assert D.expand("{cc} {input}", Path("a.cpp"), Path("o"))[0] == "g++"


def test_missing_toolchain_is_distinct(tmp_path):
    cmds = dict(D.DEFAULT_COMMANDS, **{"source-no-opt": "no-such-compiler-xyz {input} -o {output}"})
    with pytest.raises(ToolchainMissingError):
        D.run_differential(CORPUS / "Fibonacci.c", tmp_path / "x.rs", commands=cmds)


def test_compare_runs():
    assert D.compare_runs((b"34", 0), (b"34", 0)).ok
    v = D.compare_runs((b"34", 0), (b"35", 0))
    assert v.status == "stdout-mismatch" and "byte 1" in v.detail
    assert D.compare_runs((b"", 0), (b"", 1)).status == "exit-mismatch"


# ----------------------------------------------------------- toolchain


def _fib_pair(tmp_path):
    src = tmp_path / "Fibonacci.c"
    shutil.copy(CORPUS / "Fibonacci.c", src)
    rs = tmp_path / "Fibonacci.rs"
    rs.write_text(transpile(src.read_text(), "Fibonacci", "Fibonacci.c")[0])
    return src, rs


@pytest.mark.toolchain
def test_patched_target_mismatch(tmp_path):
    src, rs = _fib_pair(tmp_path)
    rs.write_text('fn main() { print!("35"); }\n')
    v = D.run_differential(src, rs)
    assert v.status == "stdout-mismatch" and v.detail.endswith("byte 1")


@pytest.mark.toolchain
def test_self_comparison_matches(tmp_path):
    src, _ = _fib_pair(tmp_path)
    cmds = dict(D.DEFAULT_COMMANDS, **{"target-release": "{cc} -O0 {input} -o {output}"})
    assert D.run_differential(src, src, commands=cmds).ok


@pytest.mark.toolchain
def test_compile_failures(tmp_path):
    src, rs = _fib_pair(tmp_path)
    bad = tmp_path / "bad.rs"
    bad.write_text("fn main() { let x: i32 = \"s\"; }\n")
    assert D.run_differential(src, bad).status == "target-compile-fail"
    badc = tmp_path / "bad.c"
    badc.write_text("int main( {\n")
    assert D.run_differential(badc, rs).status == "source-compile-fail"


@pytest.mark.toolchain
def test_timeout(tmp_path):
    src = tmp_path / "spin.c"
    src.write_text("int main() { for (;;) {} }\n")
    rs = tmp_path / "spin.rs"
    rs.write_text("fn main() {}\n")
    assert D.run_differential(src, rs, timeout=0.5).status == "timeout"


@pytest.mark.toolchain
def test_bench_main_writes_outputs(tmp_path, capsys):
    src, rs = _fib_pair(tmp_path)
    out = tmp_path / "bench"
    code = D.main([str(src), "--rs-dir", str(tmp_path), "--out-dir", str(out), "--repeats", "2"])
    assert code == 0
    table = (out / "bench.txt").read_text().split("\n")
    assert table[0] == "program target-release source-no-opt source-o1"
    assert table[1].split()[0] == "Fibonacci" and len(table[1].split()) == 4
    raw = (out / "bench_raw.csv").read_text().strip().split("\n")
    assert len(raw) == 1 + 3 * 2
