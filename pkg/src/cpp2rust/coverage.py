"""Conversion coverage per unit, from the lowering ledger."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .diagnostics import Diagnostic
from .errors import ReportFormatError
from .target.emitter import FENCE_CLOSE

FORMATS = ("json", "table")


@dataclass
class FileEntry:
    file: str
    total: int
    converted: int
    percent: float
    diagnostics: list[Diagnostic] = field(default_factory=list)
    line_percent: Optional[float] = None  # informational, lines outside fences

    def to_dict(self) -> dict:
        return {
            "file": self.file,
            "total": self.total,
            "converted": self.converted,
            "percent": self.percent,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }


@dataclass
class ConversionReport:
    entries: list[FileEntry] = field(default_factory=list)

    def sorted(self) -> list[FileEntry]:
        return sorted(self.entries, key=lambda e: e.file)


def percent_of(converted: int, total: int) -> float:
    return 100.0 if total == 0 else 100.0 * converted / total


def percent_text(p: float) -> str:
    # truncate so that only a complete conversion reads as 100.0
    return f"{math.floor(p * 10 + 1e-9) / 10:.1f}"


def compute_report(ledger: Iterable, unit_name: str) -> FileEntry:
    """Counts and one diagnostic per unconverted ledger entry."""
    ledger = list(ledger)
    done = sum(1 for e in ledger if e.converted)
    diags = []
    for e in ledger:
        if e.converted:
            continue
        file = e.loc.file if e.loc.file and e.loc.file != "<none>" else unit_name
        msg = f"{e.rule_id} not converted: {e.reason}"
        if e.detail and e.detail != e.reason:
            msg += f" ({e.detail})"
        diags.append(Diagnostic("unconverted", e.reason, file, e.loc.line, msg))
    return FileEntry(unit_name, len(ledger), done, percent_of(done, len(ledger)), diags)


def line_coverage(text: str) -> float:
    """Share of non-blank emitted lines outside comment fences."""
    total = inside = 0
    fenced = False
    for ln in text.split("\n"):
        s = ln.strip()
        if not s:
            continue
        total += 1
        if s.startswith("// [UNCONVERTED"):
            fenced = True
        if fenced:
            inside += 1
        if s == FENCE_CLOSE:
            fenced = False
    return percent_of(total - inside, total)


def _remarks(e: FileEntry) -> str:
    if not e.diagnostics:
        parts = ["fully converted"]
    else:
        reasons: dict[str, int] = {}
        for d in e.diagnostics:
            reasons[d.rule_id] = reasons.get(d.rule_id, 0) + 1
        parts = [", ".join(f"{r} x{n}" if n > 1 else r for r, n in sorted(reasons.items()))]
    if e.line_percent is not None:
        parts.append(f"lines {percent_text(e.line_percent)}%")
    return "; ".join(parts)


def render_report(report: ConversionReport, fmt: str = "table") -> str:
    if fmt not in FORMATS:
        raise ReportFormatError(f"unknown report format {fmt!r}; expected one of {', '.join(FORMATS)}")
    entries = report.sorted()
    if fmt == "json":
        return json.dumps([e.to_dict() for e in entries], indent=2) + "\n"
    rows = [(e.file, percent_text(e.percent), _remarks(e)) for e in entries]
    head = ("File", "Percent", "Remarks")
    w0 = max([len(head[0])] + [len(r[0]) for r in rows])
    w1 = max([len(head[1])] + [len(r[1]) for r in rows])
    line = lambda r: f"{r[0]:<{w0}}  {r[1]:>{w1}}  {r[2]}".rstrip()
    out = [line(head), "-" * (w0 + w1 + 4 + max([len(head[2])] + [len(r[2]) for r in rows]))]
    out += [line(r) for r in rows]
    return "\n".join(out) + "\n"


def parse_json_report(text: str) -> ConversionReport:
    entries = []
    for d in json.loads(text):
        diags = [Diagnostic(x["severity"], x["rule_id"], x["file"], x["line"], x["message"]) for x in d["diagnostics"]]
        entries.append(FileEntry(d["file"], d["total"], d["converted"], d["percent"], diags))
    return ConversionReport(entries)
