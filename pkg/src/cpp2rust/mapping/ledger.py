"""Conversion ledger: one outcome per visited construct."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..frontend.ast import Loc, NOLOC

CONVERTED = "converted"
UNCONVERTED = "unconverted"


class Unconvertible(Exception):
    """Raised by a lowering rule that cannot handle its input."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason
        self.detail = detail


@dataclass(frozen=True)
class MappingOutcome:
    status: str
    rule_id: str
    reason: Optional[str] = None

    def __post_init__(self):
        if self.status not in (CONVERTED, UNCONVERTED):
            raise ValueError(f"bad status {self.status!r}")
        if (self.status == CONVERTED) != (self.reason is None):
            raise ValueError("reason must be present exactly when unconverted")


@dataclass(frozen=True)
class LedgerEntry:
    construct_id: str
    outcome: MappingOutcome
    loc: Loc = NOLOC
    detail: str = ""

    @property
    def converted(self) -> bool:
        return self.outcome.status == CONVERTED

    @property
    def rule_id(self) -> str:
        return self.outcome.rule_id

    @property
    def reason(self) -> Optional[str]:
        return self.outcome.reason


def converted(cid: str, rule: str, loc: Loc = NOLOC) -> LedgerEntry:
    return LedgerEntry(cid, MappingOutcome(CONVERTED, rule), loc)


def unconverted(cid: str, rule: str, reason: str, loc: Loc = NOLOC, detail: str = "") -> LedgerEntry:
    return LedgerEntry(cid, MappingOutcome(UNCONVERTED, rule, reason), loc, detail)
