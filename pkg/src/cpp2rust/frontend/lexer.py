"""Lossless tokenizer for the supported C/C++ subset.

Whitespace is the only thing not kept as a token; comments and whole
preprocessor lines survive so later stages can attach or copy them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from ..errors import LexError


class TokenKind(str, enum.Enum):
    KEYWORD = "keyword"
    IDENT = "identifier"
    INT = "integer-literal"
    FLOAT = "float-literal"
    STRING = "string-literal"
    CHAR = "char-literal"
    PUNCT = "punctuator"
    DIRECTIVE = "preprocessor-directive"
    COMMENT = "comment"


KEYWORDS = frozenset(
    """
    auto bool break case catch char class const const_cast constexpr continue
    default delete do double dynamic_cast else enum explicit extern false float
    for friend goto if inline int long mutable namespace new noexcept nullptr
    operator override private protected public register reinterpret_cast return
    short signed sizeof static static_cast struct switch template this throw
    true try typedef typename union unsigned using virtual void volatile while
    """.split()
)

# longest first so greedy matching works
PUNCTUATORS = sorted(
    """
    >>= <<= ... ->* :: -> ++ -- << >> <= >= == != && || += -= *= /= %= &= |= ^= ## .*
    { } [ ] ( ) ; : , . ? ~ ! + - * / % ^ & | = < > #
    """.split(),
    key=len,
    reverse=True,
)


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    col: int
    offset: int

    @property
    def end(self) -> int:
        return self.offset + len(self.text)

    def is_(self, text: str) -> bool:
        return self.text == text and self.kind in (TokenKind.PUNCT, TokenKind.KEYWORD, TokenKind.IDENT)

    def __repr__(self) -> str:
        return f"Token({self.kind.value}, {self.text!r}, {self.line}:{self.col})"


_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CHARS = _IDENT_START | set("0123456789")
_WS = " \t\r\n\f\v"


class _Scanner:
    def __init__(self, src: str, file: str):
        self.src = src
        self.file = file
        self.i = 0
        self.line = 1
        self.col = 1
        self.at_line_start = True

    def error(self, msg: str, line: int, col: int) -> LexError:
        return LexError(msg, line, col, self.file)

    def advance_to(self, j: int) -> None:
        chunk = self.src[self.i:j]
        nl = chunk.count("\n")
        if nl:
            self.line += nl
            self.col = len(chunk) - chunk.rfind("\n")
        else:
            self.col += len(chunk)
        self.i = j

    def run(self) -> list[Token]:
        src, n = self.src, len(self.src)
        out: list[Token] = []
        while self.i < n:
            c = src[self.i]
            if c in _WS:
                if c == "\n":
                    self.at_line_start = True
                self.advance_to(self.i + 1)
                continue
            start, line, col = self.i, self.line, self.col
            if c == "#" and self.at_line_start:
                kind, j = TokenKind.DIRECTIVE, self._directive_end(start)
            elif src.startswith("//", start):
                j = src.find("\n", start)
                kind, j = TokenKind.COMMENT, (n if j < 0 else j)
            elif src.startswith("/*", start):
                j = src.find("*/", start + 2)
                if j < 0:
                    raise self.error("unterminated comment", line, col)
                kind, j = TokenKind.COMMENT, j + 2
            elif c == '"' or (c in "LuU" and self._quote_after_prefix(start) == '"'):
                kind, j = TokenKind.STRING, self._quoted_end(start, '"', line, col)
            elif c == "'" or (c in "LuU" and self._quote_after_prefix(start) == "'"):
                kind, j = TokenKind.CHAR, self._quoted_end(start, "'", line, col)
            elif c.isdigit() or (c == "." and start + 1 < n and src[start + 1].isdigit()):
                kind, j = self._number(start)
            elif c in _IDENT_START:
                j = start + 1
                while j < n and src[j] in _IDENT_CHARS:
                    j += 1
                kind = TokenKind.KEYWORD if src[start:j] in KEYWORDS else TokenKind.IDENT
            elif c == "\0":
                raise self.error("embedded NUL byte", line, col)
            else:
                for p in PUNCTUATORS:
                    if src.startswith(p, start):
                        j = start + len(p)
                        break
                else:
                    j = start + 1  # stray character, kept so lexing stays lossless
                kind = TokenKind.PUNCT
            out.append(Token(kind, src[start:j], line, col, start))
            # a block comment that stays on one line does not end the line start
            if not (kind == TokenKind.COMMENT and src.startswith("/*", start) and "\n" not in src[start:j]):
                self.at_line_start = False
            self.advance_to(j)
        return out

    def _quote_after_prefix(self, i: int) -> str:
        src = self.src
        j = i + 1
        if src.startswith("u8", i):
            j = i + 2
        return src[j] if j < len(src) else ""

    def _directive_end(self, i: int) -> int:
        src, n = self.src, len(self.src)
        j = i
        while j < n:
            if src[j] == "\\" and src.startswith("\n", j + 1):
                j += 2
                continue
            if src[j] == "\n":
                break
            if src.startswith("/*", j):
                k = src.find("*/", j + 2)
                if k < 0:
                    raise self.error("unterminated comment", self.line, self.col)
                j = k + 2
                continue
            j += 1
        # trailing whitespace belongs to the gap, not the token
        while j > i and src[j - 1] in " \t\r":
            j -= 1
        return j

    def _quoted_end(self, i: int, quote: str, line: int, col: int) -> int:
        src, n = self.src, len(self.src)
        j = src.index(quote, i) + 1
        while j < n:
            ch = src[j]
            if ch == "\\":
                j += 2
                continue
            if ch == quote:
                return j + 1
            if ch == "\n":
                break
            j += 1
        what = "string" if quote == '"' else "character"
        raise self.error(f"unterminated {what} literal", line, col)

    def _number(self, i: int) -> tuple[TokenKind, int]:
        src, n = self.src, len(self.src)
        j = i
        is_float = False
        if src.startswith(("0x", "0X"), i):
            j = i + 2
            while j < n and (src[j] in "0123456789abcdefABCDEF'"):
                j += 1
        else:
            while j < n and (src[j].isdigit() or src[j] == "'"):
                j += 1
            if j < n and src[j] == ".":
                is_float = True
                j += 1
                while j < n and src[j].isdigit():
                    j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    is_float = True
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
        while j < n and src[j] in "uUlLfF":
            if src[j] in "fF" and not src.startswith(("0x", "0X"), i):
                is_float = True
            j += 1
        return (TokenKind.FLOAT if is_float else TokenKind.INT), j


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    """Split ``source`` into tokens; raises :class:`LexError` on unterminated literals."""
    return _Scanner(source, file).run()


def detokenize(tokens: list[Token], source: str) -> str:
    """Rebuild text from tokens plus the whitespace gaps between them."""
    parts = []
    pos = 0
    for tok in tokens:
        parts.append(source[pos:tok.offset])
        parts.append(tok.text)
        pos = tok.end
    parts.append(source[pos:])
    return "".join(parts)
