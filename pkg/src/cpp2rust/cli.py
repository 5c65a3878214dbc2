"""Command-line driver: group, parse, merge, lower, emit, validate, report."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .coverage import ConversionReport, FileEntry, compute_report, line_coverage, render_report
from .diagnostics import Diagnostic
from .errors import ConfigError, TranspileError
from .frontend import merge_units, parse_source
from .mapping import LoweringConfig, lower_unit
from .target import emit_unit, validate_target

DECL_EXT = (".h", ".hh", ".hpp", ".hxx")
INLINE_EXT = (".icc", ".inl", ".ipp", ".tcc")
IMPL_EXT = (".c", ".cc", ".cpp", ".cxx", ".C")

EXIT_OK, EXIT_ERROR, EXIT_UNCONVERTED = 0, 1, 2


@dataclass
class UnitGroup:
    stem: str
    decl: Optional[Path] = None
    inline: Optional[Path] = None
    impl: Optional[Path] = None

    @property
    def files(self) -> list[Path]:
        return [p for p in (self.decl, self.inline, self.impl) if p is not None]


@dataclass
class RunConfig:
    inputs: list
    out_dir: Path = Path("out")
    merge: bool = True
    safe_mode: bool = True
    global_strategy: str = "lock"
    return_style: str = "tail"
    report_format: str = "table"
    fail_on_unconverted: bool = False

    def lowering(self) -> LoweringConfig:
        return LoweringConfig(self.global_strategy, self.safe_mode, self.return_style)


def ext_class(path: Path) -> Optional[str]:
    suffix = path.suffix
    if suffix in DECL_EXT:
        return "decl"
    if suffix in INLINE_EXT:
        return "inline"
    if suffix in IMPL_EXT or suffix.lower() in IMPL_EXT:
        return "impl"
    return None


def group_inputs(paths) -> list[UnitGroup]:
    """Files sharing a stem form one (decl, inline, impl) group, sorted by stem."""
    groups: dict[str, UnitGroup] = {}
    for raw in paths:
        p = Path(raw)
        if not p.is_file():
            raise OSError(f"cannot read {p}: no such file")
        try:
            with open(p, "rb"):
                pass
        except OSError as exc:
            raise OSError(f"cannot read {p}: {exc.strerror or exc}") from exc
        kind = ext_class(p)
        if kind is None:
            raise ConfigError(f"{p}: unrecognised source extension {p.suffix!r}")
        g = groups.setdefault(p.stem, UnitGroup(p.stem))
        if getattr(g, kind) is not None and Path(getattr(g, kind)) != p:
            raise ConfigError(f"{p}: stem {p.stem!r} already has a {kind} file {getattr(g, kind)}")
        setattr(g, kind, p)
    return [groups[k] for k in sorted(groups)]


def _expand(paths) -> list[Path]:
    out = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            out += sorted(q for q in p.rglob("*") if q.is_file() and ext_class(q) is not None)
        else:
            out.append(p)
    return out


@dataclass
class UnitResult:
    stem: str
    text: str
    entry: FileEntry
    diagnostics: list[Diagnostic] = field(default_factory=list)
    violations: list = field(default_factory=list)


def transpile_group(group: UnitGroup, config: RunConfig) -> list[UnitResult]:
    """Parse, merge and lower one group; ``--no-merge`` yields one unit per file."""
    parsed = []
    for p in group.files:
        parsed.append((p, parse_source(p.read_text(encoding="latin-1"), group.stem, str(p))))
    if config.merge or len(parsed) == 1:
        units = [(group.stem, _merge(group, dict((ext_class(p), u) for p, u in parsed)))]
    else:
        units = []
        for p, u in parsed:
            name = f"{p.stem}_{p.suffix.lstrip('.')}"
            u.name = name
            units.append((name, merge_units(u, strict=False)))
    out = []
    for name, unit in units:
        target, ledger = lower_unit(unit, config.lowering())
        text = emit_unit(target)
        entry = compute_report(ledger, name)
        entry.line_percent = line_coverage(text)
        violations = validate_target(text, config.safe_mode)
        diags = list(target.notes) + entry.diagnostics
        for v in violations:
            diags.append(Diagnostic("warning", "safe-mode", f"{name}.rs", v.line, f"`{v.token}` in emitted code"))
        out.append(UnitResult(name, text, entry, diags, violations))
    return out


def _merge(group: UnitGroup, parts: dict):
    if set(parts) == {"impl"}:
        return merge_units(parts["impl"], strict=False)
    decl = parts.get("decl") or parts.get("inline") or parts.get("impl")
    inline = parts.get("inline") if decl is not parts.get("inline") else None
    impl = parts.get("impl") if decl is not parts.get("impl") else None
    return merge_units(decl, inline, impl)


def run_pipeline(config: RunConfig, err=None, out=None) -> int:
    """Run every group; returns the process exit status."""
    err = err or sys.stderr
    out = out or sys.stdout
    try:
        config.lowering()
        groups = group_inputs(_expand(config.inputs))
    except (OSError, TranspileError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_ERROR
    try:
        out_dir = Path(config.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory {config.out_dir}: {exc.strerror or exc}", file=err)
        return EXIT_ERROR
    status = EXIT_OK
    report = ConversionReport()
    for group in groups:
        try:
            results = transpile_group(group, config)
        except (OSError, TranspileError) as exc:
            print(f"error:{group.stem}:0: {exc}", file=err)
            status = EXIT_ERROR
            continue
        for r in results:
            for d in r.diagnostics:
                print(d.render(), file=err)
            try:
                (out_dir / f"{r.stem}.rs").write_text(r.text, encoding="latin-1")
            except OSError as exc:
                print(f"error:{r.stem}:0: cannot write output: {exc.strerror or exc}", file=err)
                status = EXIT_ERROR
                continue
            if r.violations:
                status = EXIT_ERROR
            report.entries.append(r.entry)
    try:
        (out_dir / "report.json").write_text(render_report(report, "json"))
        (out_dir / "report.txt").write_text(render_report(report, "table"))
    except OSError as exc:
        print(f"error: cannot write report: {exc.strerror or exc}", file=err)
        return EXIT_ERROR
    print(render_report(report, config.report_format), end="", file=out)
    if status == EXIT_OK and config.fail_on_unconverted and any(e.percent < 100.0 for e in report.entries):
        status = EXIT_UNCONVERTED
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cpp2rust", description="Transpile a C/C++ subset to safe Rust.")
    ap.add_argument("inputs", nargs="+", help="source files or directories")
    ap.add_argument("--out-dir", default="out", help="where .rs files and reports go (default: out)")
    ap.add_argument("--no-merge", action="store_true", help="transpile each file on its own")
    ap.add_argument("--unsafe", action="store_true", help="turn off safe mode")
    ap.add_argument("--global-strategy", choices=("lock", "unsafe-static"), default="lock")
    ap.add_argument("--return-style", choices=("tail", "explicit"), default="tail")
    ap.add_argument("--report", choices=("json", "table"), default="table", help="format printed to stdout")
    ap.add_argument("--fail-on-unconverted", action="store_true", help="exit 2 if any unit is below 100%%")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = RunConfig(
        inputs=args.inputs,
        out_dir=Path(args.out_dir),
        merge=not args.no_merge,
        safe_mode=not args.unsafe,
        global_strategy=args.global_strategy,
        return_style=args.return_style,
        report_format=args.report,
        fail_on_unconverted=args.fail_on_unconverted,
    )
    return run_pipeline(config)


if __name__ == "__main__":
    sys.exit(main())
