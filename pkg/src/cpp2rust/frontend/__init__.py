"""Tokenizer, parser and unit merger for the C/C++ subset."""

from .lexer import Token, TokenKind, detokenize, tokenize
from .merge import attach_definitions, merge_units
from .parser import parse_source, parse_unit

__all__ = [
    "Token", "TokenKind", "tokenize", "detokenize",
    "parse_unit", "parse_source", "merge_units", "attach_definitions",
]
