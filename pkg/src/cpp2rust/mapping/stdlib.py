"""Shims for the C library calls the corpus uses.

The helpers here are pure text transformations: C literal decoding, target
literal encoding, and printf format translation. The engine decides where
they apply.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .ledger import Unconvertible
from .types import RType

_SIMPLE_ESCAPES = {
    "n": "\n", "t": "\t", "r": "\r", "a": "\a", "b": "\b", "f": "\f", "v": "\v",
    "\\": "\\", "'": "'", '"': '"', "?": "?",
}


def _decode_body(body: str) -> str:
    out = []
    i = 0
    n = len(body)
    while i < n:
        c = body[i]
        if c != "\\":
            out.append(c)
            i += 1
            continue
        i += 1
        if i >= n:
            raise Unconvertible("bad-literal", "dangling backslash")
        e = body[i]
        if e in _SIMPLE_ESCAPES:
            out.append(_SIMPLE_ESCAPES[e])
            i += 1
        elif e in "01234567":
            j = i
            while j < n and j < i + 3 and body[j] in "01234567":
                j += 1
            out.append(chr(int(body[i:j], 8) & 0xFF))
            i = j
        elif e == "x":
            j = i + 1
            while j < n and body[j] in "0123456789abcdefABCDEF":
                j += 1
            if j == i + 1:
                raise Unconvertible("bad-literal", "empty hex escape")
            out.append(chr(int(body[i + 1:j], 16) & 0xFF))
            i = j
        elif e in "uU":
            width = 4 if e == "u" else 8
            out.append(chr(int(body[i + 1:i + 1 + width], 16)))
            i += 1 + width
        else:
            raise Unconvertible("bad-literal", f"unknown escape \\{e}")
    return "".join(out)


_PIECE = re.compile(r'(?:u8|L|u|U)?"((?:\\.|[^"\\])*)"', re.S)


def decode_c_string(text: str) -> str:
    """Decode one or more adjacent C string literals into their value."""
    pieces = _PIECE.findall(text)
    if not pieces:
        raise Unconvertible("bad-literal", text)
    return "".join(_decode_body(p) for p in pieces)


def decode_c_char(text: str) -> int:
    m = re.fullmatch(r"(?:u8|L|u|U)?'((?:\\.|[^'\\])+)'", text)
    if not m:
        raise Unconvertible("bad-literal", text)
    value = _decode_body(m.group(1))
    if len(value) != 1:
        raise Unconvertible("multi-char-literal", text)
    return ord(value)


def _escape_char(ch: str, quote: str) -> str:
    if ch == "\\":
        return "\\\\"
    if ch == quote:
        return "\\" + quote
    if ch == "\n":
        return "\\n"
    if ch == "\t":
        return "\\t"
    if ch == "\r":
        return "\\r"
    if ch == "\0":
        return "\\0"
    o = ord(ch)
    if o < 0x20 or o == 0x7F:
        return f"\\x{o:02x}"
    return ch


def rust_str_literal(value: str) -> str:
    return '"' + "".join(_escape_char(c, '"') for c in value) + '"'


def rust_byte_literal(code: int) -> str:
    if code > 0x7F:
        return f"b'\\x{code:02x}'"
    return "b'" + _escape_char(chr(code), "'") + "'"


@dataclass(frozen=True)
class FormatArg:
    """How one printf argument must be adapted for its placeholder."""

    conversion: str  # d | u | x | c | s | f
    target: Optional[str]  # scalar the argument should be cast to, if any


_SPEC = re.compile(r"%([-+ 0#]*)(\d+|\*)?(?:\.(\d+|\*))?(hh|h|ll|l|L|z|j|t)?([a-zA-Z%])")
_SIGNED = {"": "i32", "hh": "i8", "h": "i16", "l": "i64", "ll": "i64", "z": "isize", "j": "i64", "t": "isize"}
_UNSIGNED = {"": "u32", "hh": "u8", "h": "u16", "l": "u64", "ll": "u64", "z": "usize", "j": "u64", "t": "usize"}


def escape_braces(s: str) -> str:
    return s.replace("{", "{{").replace("}", "}}")


def translate_printf(fmt: str) -> tuple[str, list[FormatArg]]:
    """Translate a decoded printf format into a target format string.

    Returns the format text (not yet quoted) and one :class:`FormatArg`
    per consumed argument.
    """
    out = []
    args: list[FormatArg] = []
    pos = 0
    for m in _SPEC.finditer(fmt):
        out.append(escape_braces(fmt[pos:m.start()]))
        pos = m.end()
        flags, width, prec, length, conv = m.groups()
        length = length or ""
        if conv == "%":
            if flags or width or prec or length:
                raise Unconvertible("format-specifier", m.group(0))
            out.append("%")
            continue
        if width == "*" or prec == "*":
            raise Unconvertible("format-specifier", m.group(0))
        if " " in flags:
            raise Unconvertible("format-specifier", m.group(0))
        if conv in "di":
            fa = FormatArg("d", _SIGNED.get(length))
        elif conv == "u":
            fa = FormatArg("u", _UNSIGNED.get(length))
        elif conv in "xXo":
            fa = FormatArg("x", _UNSIGNED.get(length))
        elif conv == "c":
            fa = FormatArg("c", None)
        elif conv == "s":
            fa = FormatArg("s", None)
        elif conv in "fF":
            fa = FormatArg("f", "f64")
        else:
            raise Unconvertible("format-specifier", m.group(0))
        if fa.target is None and conv not in "cs":
            raise Unconvertible("format-specifier", m.group(0))
        if prec is not None and conv not in "fFs":
            raise Unconvertible("format-specifier", m.group(0))
        spec = ""
        if "-" in flags:
            spec += "<"
        elif width and conv in "cs":
            spec += ">"
        if "+" in flags:
            spec += "+"
        if "#" in flags:
            spec += "#"
        if "0" in flags and "-" not in flags and conv not in "cs":
            spec += "0"
        if width:
            spec += width
        if conv in "fF":
            spec += "." + (prec if prec is not None else "6")
        elif prec is not None:
            spec += "." + prec
        if conv in "xXo":
            spec += {"x": "x", "X": "X", "o": "o"}[conv]
        out.append("{:" + spec + "}" if spec else "{}")
        args.append(fa)
    out.append(escape_braces(fmt[pos:]))
    return "".join(out), args


def print_macro(text: str, stream: str) -> tuple[str, str]:
    """Choose the printing macro; strips one trailing newline for the line form."""
    err = stream == "stderr"
    if text.endswith("\n"):
        return ("eprintln!" if err else "println!"), text[:-1]
    return ("eprint!" if err else "print!"), text


def format_call(macro: str, fmt: str, args: list[str]) -> str:
    lit = rust_str_literal(fmt)
    if not args:
        if fmt == "" and macro.endswith("ln!"):
            return f"{macro}()"
        return f"{macro}({lit})"
    return f"{macro}({lit}, {', '.join(args)})"


STREAM_NAMES = {"cout": "stdout", "std::cout": "stdout", "cerr": "stderr", "std::cerr": "stderr",
                "clog": "stderr", "std::clog": "stderr"}
ENDL_NAMES = {"endl", "std::endl"}
PRINT_CALLS = {"printf", "fprintf", "puts", "putchar", "fputs", "fflush"}


def stream_placeholder(t: RType) -> tuple[str, Optional[str]]:
    """Placeholder and argument suffix for one ``<<`` operand of a stream."""
    if t.is_float:
        raise Unconvertible("stream-float-format", t.render())
    if t.is_bool:
        return "{}", " as i32"
    if t.kind == "scalar" and t.name == "u8":
        return "{}", " as char"
    if t.kind == "scalar" and t.name == "i8":
        return "{}", " as u8 as char"
    if t.is_int or t.kind in ("str", "string"):
        return "{}", None
    if t.kind == "ref" and t.inner is not None and (t.inner.is_int or t.inner.kind == "string"):
        return "{}", None
    raise Unconvertible("stream-operand", t.render())
