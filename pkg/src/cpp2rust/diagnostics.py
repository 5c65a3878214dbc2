"""Diagnostic records produced by every stage and consumed by the report."""

from __future__ import annotations

from dataclasses import dataclass

SEVERITIES = ("info", "warning", "unconverted")


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    rule_id: str
    file: str
    line: int
    message: str

    def __post_init__(self):
        if self.severity not in SEVERITIES:
            raise ValueError(f"unknown severity {self.severity!r}")

    def render(self) -> str:
        return f"{self.severity}:{self.file}:{self.line}: {self.message}"

    def to_dict(self) -> dict:
        return {
            "severity": self.severity,
            "rule_id": self.rule_id,
            "file": self.file,
            "line": self.line,
            "message": self.message,
        }
