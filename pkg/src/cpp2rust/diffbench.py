"""Differential compile-and-run checks and a wall-clock benchmark harness.

Compiler invocations are command templates keyed by mode. ``{input}`` and
``{output}`` name the program and the binary; ``{cc}`` expands to ``gcc``
for C sources and ``g++`` otherwise.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import shlex
import shutil
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

from .errors import BenchTableError, MeasurementError, ToolchainMissingError

MODES = ("target-release", "source-no-opt", "source-o1")
DEFAULT_REPEATS = 10

DEFAULT_COMMANDS = {
    "target-release": "rustc --edition 2021 -O {input} -o {output}",
    "source-no-opt": "{cc} -O0 {input} -o {output}",
    "source-o1": "{cc} -O1 {input} -o {output}",
}
SOURCE_DEFAULT_MODE = "source-no-opt"
TARGET_DEFAULT_MODE = "target-release"

STATUSES = ("match", "stdout-mismatch", "exit-mismatch", "source-compile-fail", "target-compile-fail", "timeout")


@dataclass(frozen=True)
class BenchRecord:
    stem: str
    mode: str
    mean_ms: float
    runs: int

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if self.mean_ms < 0:
            raise ValueError("mean_ms must be nonnegative")


@dataclass
class DiffVerdict:
    status: str
    detail: str = ""
    source_stdout: bytes = b""
    target_stdout: bytes = b""
    source_exit: Optional[int] = None
    target_exit: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.status == "match"


@dataclass
class Compiled:
    binary: Optional[Path]
    error: str = ""


# ------------------------------------------------------------ commands


def load_commands(path: Optional[Path] = None) -> dict[str, str]:
    """Default templates, overridden by ``mode = template`` lines from ``path``."""
    commands = dict(DEFAULT_COMMANDS)
    if path is None:
        return commands
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.read_string("[commands]\n" + Path(path).read_text())
    for key, value in cp["commands"].items():
        if key not in MODES:
            raise ValueError(f"{path}: unknown mode {key!r}")
        commands[key] = value
    return commands


def c_compiler(source: Path) -> str:
    return "gcc" if source.suffix == ".c" else "g++"


def expand(template: str, source: Path, output: Path) -> list[str]:
    argv = []
    for tok in shlex.split(template):
        argv.append(tok.replace("{input}", str(source)).replace("{output}", str(output))
                    .replace("{cc}", c_compiler(source)))
    return argv


def require_tool(argv: Sequence[str]) -> None:
    if not argv or shutil.which(argv[0]) is None:
        raise ToolchainMissingError(f"{argv[0] if argv else '<empty command>'} not found on PATH")


def compile_program(source: Path, mode: str, out_dir: Path, commands: Optional[dict] = None) -> Compiled:
    commands = commands or DEFAULT_COMMANDS
    output = Path(out_dir) / f"{source.stem}.{mode}"
    argv = expand(commands[mode], source, output)
    require_tool(argv)
    proc = subprocess.run(argv, capture_output=True)
    if proc.returncode != 0:
        return Compiled(None, proc.stderr.decode(errors="replace").strip() or f"exit {proc.returncode}")
    return Compiled(output)


# -------------------------------------------------------- differential


def first_difference(a: bytes, b: bytes) -> int:
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return i
    return min(len(a), len(b))


def compare_runs(source: tuple[bytes, int], target: tuple[bytes, int]) -> DiffVerdict:
    (sout, scode), (tout, tcode) = source, target
    v = DiffVerdict("match", "", sout, tout, scode, tcode)
    if sout != tout:
        v.status = "stdout-mismatch"
        v.detail = f"first difference at byte {first_difference(sout, tout)}"
    elif scode != tcode:
        v.status = "exit-mismatch"
        v.detail = f"source exited {scode}, target exited {tcode}"
    return v


def _execute(binary: Path, stdin: bytes, timeout: float) -> tuple[bytes, int]:
    proc = subprocess.run([str(binary)], input=stdin, capture_output=True, timeout=timeout)
    return proc.stdout, proc.returncode


def run_differential(
    source: Path,
    target: Path,
    stdin: bytes = b"",
    timeout: float = 10.0,
    commands: Optional[dict] = None,
    work_dir: Optional[Path] = None,
) -> DiffVerdict:
    """Compile both programs in their default modes, run them, compare stdout and exit code."""
    source, target = Path(source), Path(target)
    commands = commands or DEFAULT_COMMANDS
    with tempfile.TemporaryDirectory(prefix="diffbench-") as tmp:
        wd = Path(work_dir) if work_dir is not None else Path(tmp)
        wd.mkdir(parents=True, exist_ok=True)
        src = compile_program(source, SOURCE_DEFAULT_MODE, wd, commands)
        if src.binary is None:
            return DiffVerdict("source-compile-fail", src.error)
        tgt = compile_program(target, TARGET_DEFAULT_MODE, wd, commands)
        if tgt.binary is None:
            return DiffVerdict("target-compile-fail", tgt.error)
        try:
            s = _execute(src.binary, stdin, timeout)
        except subprocess.TimeoutExpired:
            return DiffVerdict("timeout", f"source exceeded {timeout} s")
        try:
            t = _execute(tgt.binary, stdin, timeout)
        except subprocess.TimeoutExpired:
            return DiffVerdict("timeout", f"target exceeded {timeout} s", source_stdout=s[0], source_exit=s[1])
        return compare_runs(s, t)


# ------------------------------------------------------------- timing


def wall_clock_ms(command: Sequence[str], stdin: bytes = b"") -> float:
    """Run ``command`` once; wall-clock milliseconds including process startup."""
    start = time.perf_counter()
    proc = subprocess.run(list(command), input=stdin, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    elapsed = (time.perf_counter() - start) * 1000.0
    if proc.returncode != 0:
        raise RuntimeError(f"exit status {proc.returncode}")
    return elapsed


def measure_runs(
    command: Sequence[str],
    repeats: int = DEFAULT_REPEATS,
    timer: Callable[[Sequence[str]], float] = wall_clock_ms,
    discard_first: bool = False,
) -> list[float]:
    """Per-run milliseconds, strictly sequential."""
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    times = []
    total = repeats + (1 if discard_first else 0)
    for i in range(total):
        try:
            ms = timer(command)
        except MeasurementError:
            raise
        except Exception as exc:
            raise MeasurementError(str(exc), i) from exc
        times.append(float(ms))
    return times[1:] if discard_first else times


def measure_runtime(
    command: Sequence[str],
    repeats: int = DEFAULT_REPEATS,
    timer: Callable[[Sequence[str]], float] = wall_clock_ms,
    discard_first: bool = False,
) -> float:
    """Arithmetic mean of ``repeats`` wall-clock runs, in milliseconds."""
    times = measure_runs(command, repeats, timer, discard_first)
    return sum(times) / len(times)


# -------------------------------------------------------------- table


def render_bench_table(records: Sequence[BenchRecord]) -> str:
    """One row per stem, mode columns in fixed order, one decimal."""
    by_stem: dict[str, dict[str, BenchRecord]] = {}
    for r in records:
        if r.mode not in MODES:
            raise BenchTableError(f"unknown mode {r.mode!r}")
        row = by_stem.setdefault(r.stem, {})
        if r.mode in row:
            raise BenchTableError(f"duplicate record for {r.stem} / {r.mode}")
        row[r.mode] = r
    mode_sets = {frozenset(row) for row in by_stem.values()}
    if len(mode_sets) > 1:
        raise BenchTableError("records do not share one mode set")
    present = mode_sets.pop() if mode_sets else frozenset(MODES)
    cols = [m for m in MODES if m in present]
    lines = [" ".join(["program"] + cols)]
    for stem in sorted(by_stem):
        lines.append(" ".join([stem] + [f"{by_stem[stem][m].mean_ms:.1f}" for m in cols]))
    return "\n".join(lines) + "\n"


def raw_csv(rows: Sequence[tuple[str, str, int, float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["stem", "mode", "run", "ms"])
    for stem, mode, i, ms in rows:
        w.writerow([stem, mode, i, f"{ms:.3f}"])
    return buf.getvalue()


@dataclass
class BenchResult:
    records: list[BenchRecord] = field(default_factory=list)
    raw: list[tuple[str, str, int, float]] = field(default_factory=list)
    verdicts: dict[str, DiffVerdict] = field(default_factory=dict)


def bench_pair(
    source: Path,
    target: Path,
    work_dir: Path,
    repeats: int = DEFAULT_REPEATS,
    commands: Optional[dict] = None,
    timer: Callable[[Sequence[str]], float] = wall_clock_ms,
    discard_first: bool = False,
    modes: Sequence[str] = MODES,
    result: Optional[BenchResult] = None,
) -> BenchResult:
    """Time ``target`` (release) and ``source`` (each optimization mode) for one stem."""
    result = result or BenchResult()
    commands = commands or DEFAULT_COMMANDS
    stem = Path(source).stem
    for mode in modes:
        prog = Path(target) if mode.startswith("target") else Path(source)
        built = compile_program(prog, mode, work_dir, commands)
        if built.binary is None:
            raise MeasurementError(f"{prog} failed to compile in mode {mode}: {built.error}", 0)
        times = measure_runs([str(built.binary)], repeats, timer, discard_first)
        result.raw += [(stem, mode, i, ms) for i, ms in enumerate(times)]
        result.records.append(BenchRecord(stem, mode, sum(times) / len(times), len(times)))
    return result


# --------------------------------------------------------------- main


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="cpp2rust-bench", description="Differential check and runtime table.")
    ap.add_argument("sources", nargs="+", help="original C/C++ programs")
    ap.add_argument("--rs-dir", required=True, help="directory holding <stem>.rs for each source")
    ap.add_argument("--out-dir", default="bench", help="where bench.txt and bench_raw.csv go")
    ap.add_argument("--repeats", type=int, default=DEFAULT_REPEATS)
    ap.add_argument("--config", help="file of `mode = command template` lines")
    ap.add_argument("--stdin", help="file fed to both programs")
    ap.add_argument("--timeout", type=float, default=10.0)
    ap.add_argument("--discard-first", action="store_true", help="drop one warm-up run per mode")
    ap.add_argument("--diff-only", action="store_true", help="skip timing")
    args = ap.parse_args(argv)
    try:
        commands = load_commands(Path(args.config) if args.config else None)
        stdin = Path(args.stdin).read_bytes() if args.stdin else b""
    except (OSError, ValueError, configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    status = 0
    result = BenchResult()
    with tempfile.TemporaryDirectory(prefix="bench-") as tmp:
        for s in args.sources:
            src = Path(s)
            tgt = Path(args.rs_dir) / f"{src.stem}.rs"
            try:
                v = run_differential(src, tgt, stdin, args.timeout, commands)
            except ToolchainMissingError as exc:
                print(f"error:{src}:0: {exc}", file=sys.stderr)
                return 1
            result.verdicts[src.stem] = v
            print(f"{src.stem}: {v.status}{' (' + v.detail + ')' if v.detail else ''}")
            if not v.ok:
                status = 1
                continue
            if args.diff_only:
                continue
            try:
                bench_pair(src, tgt, Path(tmp), args.repeats, commands, discard_first=args.discard_first,
                           result=result)
            except (MeasurementError, ToolchainMissingError) as exc:
                print(f"error:{src}:0: {exc}", file=sys.stderr)
                status = 1
    if not args.diff_only:
        table = render_bench_table(result.records)
        (out_dir / "bench.txt").write_text(table)
        (out_dir / "bench_raw.csv").write_text(raw_csv(result.raw))
        print(table, end="")
    return status


if __name__ == "__main__":
    sys.exit(main())
