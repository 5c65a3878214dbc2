from __future__ import annotations

import json
import re
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from cpp2rust.cli import RunConfig, group_inputs, main, run_pipeline
from cpp2rust.errors import ConfigError

from support import BOOL_ARRAY, CORPUS, FIXTURES

DIAG = re.compile(r"^(info|warning|unconverted|error):[^:]+:\d+: .+$")


def touch(d: Path, *names):
    for n in names:
        (d / n).write_text("int x;\n")
    return [d / n for n in names]


def test_group_triple():
    (g,) = group_inputs(BOOL_ARRAY)
    assert g.stem == "bool-array" and g.decl and g.inline and g.impl


def test_group_singleton():
    (g,) = group_inputs([CORPUS / "Fibonacci.c"])
    assert g.files == [CORPUS / "Fibonacci.c"]


def test_group_two_stems_sorted(tmp_path):
    groups = group_inputs(touch(tmp_path, "b.cc", "a.h"))
    assert [g.stem for g in groups] == ["a", "b"]


def test_group_missing_file_names_path(tmp_path):
    with pytest.raises(OSError, match="nope.c"):
        group_inputs([tmp_path / "nope.c"])


def test_group_unknown_extension(tmp_path):
    with pytest.raises(ConfigError):
        group_inputs(touch(tmp_path, "x.txt"))


def run(args, capsys):
    code = main([str(a) for a in args])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_corpus_run(tmp_path, capsys):
    out = tmp_path / "out"
    code, stdout, err = run([CORPUS, "--out-dir", out], capsys)
    assert code == 0
    rs = sorted(p.name for p in out.glob("*.rs"))
    assert rs == ["Catalan.rs", "Constructors.rs", "Fibonacci.rs", "LinkedList.rs", "bool-array.rs"]
    doc = json.loads((out / "report.json").read_text())
    assert [d["file"] for d in doc] == ["Catalan", "Constructors", "Fibonacci", "LinkedList", "bool-array"]
    assert all(d["percent"] == 100.0 for d in doc)
    assert (out / "report.txt").read_text() == stdout
    for line in err.splitlines():
        assert DIAG.match(line), line


def test_report_json_to_stdout(tmp_path, capsys):
    code, stdout, _ = run([CORPUS / "Fibonacci.c", "--out-dir", tmp_path, "--report", "json"], capsys)
    assert code == 0 and json.loads(stdout)[0]["file"] == "Fibonacci"


def test_fail_on_unconverted(tmp_path, capsys):
    code, _, err = run([FIXTURES / "template_only.cpp", "--out-dir", tmp_path, "--fail-on-unconverted"], capsys)
    assert code == 2
    assert "unconverted:" in err and "template" in err
    code, _, _ = run([FIXTURES / "template_only.cpp", "--out-dir", tmp_path], capsys)
    assert code == 0


def test_nonexistent_input(tmp_path, capsys):
    code, _, err = run([tmp_path / "missing.c", "--out-dir", tmp_path / "o"], capsys)
    assert code == 1 and "missing.c" in err


def test_unsafe_static_needs_unsafe_flag(tmp_path, capsys):
    code, _, err = run([FIXTURES / "counter.cpp", "--out-dir", tmp_path, "--global-strategy", "unsafe-static"], capsys)
    assert code == 1 and "safe mode" in err
    code, _, _ = run([FIXTURES / "counter.cpp", "--out-dir", tmp_path, "--global-strategy", "unsafe-static",
                      "--unsafe"], capsys)
    assert code == 0
    assert "static mut g" in (tmp_path / "counter.rs").read_text()


def test_return_style_flag(tmp_path, capsys):
    run([CORPUS / "Fibonacci.c", "--out-dir", tmp_path, "--return-style", "explicit"], capsys)
    assert "return " in (tmp_path / "Fibonacci.rs").read_text()


def test_no_merge_writes_one_file_per_input(tmp_path, capsys):
    code, _, _ = run([*BOOL_ARRAY, "--out-dir", tmp_path, "--no-merge"], capsys)
    names = sorted(p.name for p in tmp_path.glob("*.rs"))
    assert names == ["bool-array_cc.rs", "bool-array_h.rs", "bool-array_icc.rs"]


def test_runs_are_byte_identical(tmp_path, capsys):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        run([CORPUS, FIXTURES / "nine_plus_template.cpp", "--out-dir", out], capsys)
        outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outs[0] == outs[1]


def test_failing_group_is_isolated(tmp_path, capsys):
    src = tmp_path / "src"
    src.mkdir()
    shutil.copy(CORPUS / "Fibonacci.c", src)
    (src / "dup.h").write_text("class D { public: int f(); };\n")
    (src / "dup.cc").write_text("int D::f() { return 1; }\nint D::f() { return 2; }\n")
    alone = tmp_path / "alone"
    run([src / "Fibonacci.c", "--out-dir", alone], capsys)
    both = tmp_path / "both"
    code, _, err = run([src, "--out-dir", both], capsys)
    assert code == 1 and "error:dup:0: duplicate definition" in err
    assert (both / "Fibonacci.rs").read_bytes() == (alone / "Fibonacci.rs").read_bytes()


def test_run_pipeline_direct(tmp_path):
    cfg = RunConfig(inputs=[FIXTURES / "empty.c"], out_dir=tmp_path)
    assert run_pipeline(cfg, err=open("/dev/null", "w"), out=open("/dev/null", "w")) == 0
    assert (tmp_path / "empty.rs").read_text() == ""
    assert json.loads((tmp_path / "report.json").read_text())[0]["percent"] == 100.0


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "cpp2rust.cli", str(CORPUS / "Catalan.cpp"), "--out-dir", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "Catalan" in proc.stdout
