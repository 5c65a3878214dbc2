from __future__ import annotations

import pytest

from cpp2rust import fuzz
from cpp2rust.frontend import parse_source

from support import transpile


def test_generation_is_seeded():
    assert fuzz.generate(7) == fuzz.generate(7)
    assert fuzz.generate(7) != fuzz.generate(8)


def test_language_choice():
    assert fuzz.generate(3, cpp=True)[0].endswith(".cpp")
    assert fuzz.generate(3, cpp=False)[0].endswith(".c")


@pytest.mark.parametrize("seed", range(0, 40, 4))
def test_programs_parse_without_opaque_regions(seed):
    name, src = fuzz.generate(seed)
    unit = parse_source(src, name.split(".")[0], name)
    assert unit.opaque_regions == []


@pytest.mark.parametrize("seed", range(1, 40, 6))
def test_programs_convert_fully(seed):
    name, src = fuzz.generate(seed)
    _, _, entry = transpile(src, name.split(".")[0], name)
    assert entry.percent == 100.0, [d.message for d in entry.diagnostics]


def test_main_writes_files(tmp_path):
    assert fuzz.main([str(tmp_path), "--count", "3", "--seed", "10"]) == 0
    assert len(list(tmp_path.iterdir())) == 3


@pytest.mark.toolchain
@pytest.mark.parametrize("seed", range(0, 12))
def test_fuzzed_programs_behave_the_same(seed, tmp_path):
    from cpp2rust.diffbench import run_differential

    name, src = fuzz.generate(seed)
    source = tmp_path / name
    source.write_text(src)
    target = tmp_path / f"{source.stem}.rs"
    target.write_text(transpile(src, source.stem, name)[0])
    v = run_differential(source, target, work_dir=tmp_path / "build")
    assert v.ok, (v.status, v.detail)
