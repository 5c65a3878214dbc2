"""Knobs that change how constructs are lowered."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigError

GLOBAL_STRATEGIES = ("lock", "unsafe-static")
RETURN_STYLES = ("tail", "explicit")
_RETURN_ALIASES = {"tail-expression": "tail", "explicit-return": "explicit"}


@dataclass(frozen=True)
class LoweringConfig:
    global_strategy: str = "lock"
    safe_mode: bool = True
    return_style: str = "tail"

    def __post_init__(self):
        if self.return_style in _RETURN_ALIASES:
            object.__setattr__(self, "return_style", _RETURN_ALIASES[self.return_style])
        if self.global_strategy not in GLOBAL_STRATEGIES:
            raise ConfigError(f"unknown global strategy {self.global_strategy!r}")
        if self.return_style not in RETURN_STYLES:
            raise ConfigError(f"unknown return style {self.return_style!r}")
        if self.safe_mode and self.global_strategy == "unsafe-static":
            raise ConfigError("the unsafe-static global strategy requires safe mode to be off")
