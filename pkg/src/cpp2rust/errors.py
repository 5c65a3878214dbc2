"""Exception hierarchy shared by every pipeline stage."""

from __future__ import annotations


class TranspileError(Exception):
    """Base class for all errors raised by cpp2rust."""


class LexError(TranspileError):
    def __init__(self, message: str, line: int, col: int, file: str = "<input>"):
        super().__init__(f"{file}:{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.file = file


class MergeError(TranspileError):
    pass


class DuplicateDefinitionError(MergeError):
    def __init__(self, name: str, first: tuple, second: tuple):
        super().__init__(
            f"duplicate definition of {name}: {first[0]}:{first[1]}-{first[2]} "
            f"and {second[0]}:{second[1]}-{second[2]}"
        )
        self.name = name
        self.spans = (first, second)


class OrphanDefinitionError(MergeError):
    def __init__(self, name: str, where: tuple):
        super().__init__(f"definition of {name} at {where[0]}:{where[1]} has no matching class")
        self.name = name
        self.where = where


class ConfigError(TranspileError):
    pass


class EmissionError(TranspileError):
    pass


class ReportFormatError(TranspileError):
    pass


class ToolchainMissingError(TranspileError):
    """An external compiler named in a command template is not on PATH."""


class MeasurementError(TranspileError):
    def __init__(self, message: str, run_index: int):
        super().__init__(f"run {run_index}: {message}")
        self.run_index = run_index


class BenchTableError(TranspileError):
    pass
