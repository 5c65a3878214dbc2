"""Lowering rules from the source syntax tree to the target syntax tree."""

from .config import LoweringConfig
from .engine import Lowerer, lower_unit
from .ledger import LedgerEntry, MappingOutcome, Unconvertible
from .overloads import rename_overloads
from .types import RType, lower_type

__all__ = [
    "LoweringConfig", "Lowerer", "lower_unit", "LedgerEntry", "MappingOutcome",
    "Unconvertible", "rename_overloads", "RType", "lower_type",
]
