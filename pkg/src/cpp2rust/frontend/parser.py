"""Recursive-descent parser for the supported C/C++ subset.

The grammar covers C-style functions, classes with single inheritance,
the usual loops and branches, ``new``/``delete``, the malloc-with-sizeof
idiom and calls. Anything else at the top level degrades to an
:class:`OpaqueRegion` that runs to the next synchronization point (brace
depth zero followed by ``;`` or a closing ``}``). Statements that fail to
parse degrade to :class:`OpaqueStmt` the same way, one level down.
"""

from __future__ import annotations

import bisect
import textwrap
from typing import Optional

from . import ast as A
from .lexer import Token, TokenKind, tokenize

SCALAR_WORDS = frozenset("void bool char short int long float double signed unsigned".split())
TYPE_START_KEYWORDS = SCALAR_WORDS | {"const", "volatile", "struct", "class", "auto", "register", "enum", "union"}
DECL_SPECIFIERS = {"static", "extern", "inline", "virtual", "explicit", "register", "constexpr", "mutable"}
STD_TYPES = {
    "string": "std::string",
    "std::string": "std::string",
    "size_t": "size_t",
    "std::size_t": "size_t",
    "ssize_t": "long",
    "int8_t": "int8_t", "int16_t": "int16_t", "int32_t": "int32_t", "int64_t": "int64_t",
    "uint8_t": "uint8_t", "uint16_t": "uint16_t", "uint32_t": "uint32_t", "uint64_t": "uint64_t",
    "std::int32_t": "int32_t", "std::uint32_t": "uint32_t",
}
TEMPLATE_TYPES = {"vector": "std::vector", "std::vector": "std::vector"}
INLINE_MACROS = {"INLINE"}
BINARY_PREC = {
    "*": 10, "/": 10, "%": 10,
    "+": 9, "-": 9,
    "<<": 8, ">>": 8,
    "<": 7, "<=": 7, ">": 7, ">=": 7,
    "==": 6, "!=": 6,
    "&": 5, "^": 4, "|": 3, "&&": 2, "||": 1,
}
ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="}


class ParseError(Exception):
    def __init__(self, message: str, tok: Optional[Token] = None, reason: str = "syntax-error", detail: str = ""):
        super().__init__(message)
        self.tok = tok
        self.reason = reason
        self.detail = detail or message


def unsupported(detail: str, tok: Optional[Token] = None) -> ParseError:
    return ParseError(f"unsupported construct: {detail}", tok, "unsupported-construct", detail)


def normalize_scalar(words: list[str]) -> str:
    """Collapse a multiset of scalar keywords into one canonical spelling."""
    unsigned = "unsigned" in words
    longs = words.count("long")
    if "void" in words:
        return "void"
    if "bool" in words:
        return "bool"
    if "float" in words:
        return "float"
    if "double" in words:
        return "double"
    if "char" in words:
        if unsigned:
            return "unsigned char"
        return "signed char" if "signed" in words else "char"
    prefix = "unsigned " if unsigned else ""
    if "short" in words:
        return prefix + "short"
    if longs >= 2:
        return prefix + "long long"
    if longs == 1:
        return prefix + "long"
    return prefix + "int"


class Parser:
    def __init__(self, tokens: list[Token], source: str, file: str, unit_name: str):
        self.toks = tokens
        self.src = source
        self.file = file
        self.unit = A.TranslationUnit(name=unit_name, files=[file])
        self.sig = [t for t in tokens if t.kind not in (TokenKind.COMMENT, TokenKind.DIRECTIVE)]
        self.sig_offsets = [t.offset for t in self.sig]
        self.directives = [t for t in tokens if t.kind == TokenKind.DIRECTIVE]
        self.comments = [t for t in tokens if t.kind == TokenKind.COMMENT]
        self.comment_offsets = [t.offset for t in self.comments]
        self.p = 0
        self.type_names: set[str] = set()
        self.class_stack: list[str] = []

    # ------------------------------------------------------------ cursor

    def peek(self, k: int = 0) -> Optional[Token]:
        i = self.p + k
        return self.sig[i] if i < len(self.sig) else None

    def at(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t is not None and t.kind in (TokenKind.PUNCT, TokenKind.KEYWORD, TokenKind.IDENT) and t.text == text

    def next(self) -> Token:
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input")
        self.p += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t is None or t.text != text or t.kind in (TokenKind.STRING, TokenKind.CHAR):
            raise ParseError(f"expected {text!r}, found {t.text if t else 'end of input'!r}", t)
        self.p += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.p += 1
            return True
        return False

    def ident(self) -> str:
        t = self.peek()
        if t is None or t.kind != TokenKind.IDENT:
            raise ParseError(f"expected identifier, found {t.text if t else 'end of input'!r}", t)
        self.p += 1
        return t.text

    # --------------------------------------------------------- locations

    def loc(self, start: int, end: int) -> A.Loc:
        a, b = self.sig[start], self.sig[max(end, start)]
        return A.Loc(self.file, a.line, a.col, b.line + b.text.count("\n"), a.offset, b.end)

    def slice_text(self, a: int, b: int) -> str:
        line_start = self.src.rfind("\n", 0, a) + 1
        prefix = self.src[line_start:a]
        if prefix.strip():
            prefix = ""
        return textwrap.dedent(prefix + self.src[a:b])

    def text(self, start: int, end: int) -> str:
        return self.slice_text(self.sig[start].offset, self.sig[max(end, start)].end)

    def leading_comments(self, k: int) -> list[str]:
        if k >= len(self.sig):
            return []
        tok = self.sig[k]
        lo = self.sig[k - 1].end if k > 0 else 0
        prev_line = self.sig[k - 1].line if k > 0 else -1
        # stop at the last directive in between
        for d in self.directives:
            if lo <= d.offset < tok.offset:
                lo = d.end
                prev_line = -1
        i = bisect.bisect_left(self.comment_offsets, lo)
        out = []
        while i < len(self.comments) and self.comments[i].offset < tok.offset:
            c = self.comments[i]
            if c.line != prev_line:
                out.append(c.text)
            i += 1
        return out

    def trailing_comment(self, end: int) -> Optional[str]:
        tok = self.sig[end]
        i = bisect.bisect_left(self.comment_offsets, tok.end)
        if i < len(self.comments):
            c = self.comments[i]
            nxt = self.sig[end + 1].offset if end + 1 < len(self.sig) else len(self.src) + 1
            if c.line == tok.line and c.offset < nxt:
                return c.text
        return None

    # ---------------------------------------------------------- top level

    def parse(self) -> A.TranslationUnit:
        directives = self._strip_guard(list(self.directives))
        di = 0
        while True:
            tok = self.peek()
            if di < len(directives) and (tok is None or directives[di].offset < tok.offset):
                di = self._directive(directives, di)
                continue
            if tok is None:
                break
            start = self.p
            try:
                items = self.external_declaration()
            except ParseError as exc:
                self.p = start
                self._recover_top(start, exc)
                items = []
            else:
                if items:
                    comments = self.leading_comments(start)
                    if comments:
                        items[0].comments = comments + items[0].comments
            self.unit.items.extend(items)
            if self.p > start:
                end_off = self.sig[self.p - 1].end
                while di < len(directives) and directives[di].offset < end_off:
                    di += 1
        return self.unit

    def _strip_guard(self, directives: list[Token]) -> list[Token]:
        if len(directives) < 3 or not self.sig and len(directives) < 3:
            return directives
        first_code = self.sig[0].offset if self.sig else len(self.src)
        last_code = self.sig[-1].end if self.sig else 0
        d0, d1 = directives[0], directives[1]
        w0 = d0.text[1:].split()
        w1 = d1.text[1:].split()
        if not (len(w0) >= 2 and w0[0] == "ifndef" and len(w1) >= 2 and w1[0] == "define" and w1[1] == w0[1]):
            return directives
        if d1.offset > first_code:
            return directives
        end = self._matching_endif(directives, 0)
        if end is None or end != len(directives) - 1 or directives[end].offset < last_code:
            return directives
        self.unit.guard = w0[1]
        for d in (d0, d1, directives[end]):
            self.unit.directives.append(A.Directive("guard", d.text, self._dloc(d), target=w0[1]))
        return directives[2:end]

    def _dloc(self, d: Token) -> A.Loc:
        return A.Loc(self.file, d.line, d.col, d.line + d.text.count("\n"), d.offset, d.end)

    @staticmethod
    def _dwords(d: Token) -> list[str]:
        body = d.text[1:].replace("\\\n", " ")
        if "//" in body:
            body = body[: body.index("//")]
        return body.split()

    def _matching_endif(self, directives: list[Token], i: int) -> Optional[int]:
        depth = 0
        for j in range(i, len(directives)):
            w = self._dwords(directives[j])
            if not w:
                continue
            if w[0] in ("if", "ifdef", "ifndef"):
                depth += 1
            elif w[0] == "endif":
                depth -= 1
                if depth == 0:
                    return j
        return None

    def _directive(self, directives: list[Token], i: int) -> int:
        d = directives[i]
        words = self._dwords(d)
        head = words[0] if words else ""
        if head in ("if", "ifdef", "ifndef"):
            j = self._matching_endif(directives, i)
            end_off = directives[j].end if j is not None else len(self.src)
            text = self.slice_text(d.offset, end_off)
            last = directives[j] if j is not None else d
            loc = A.Loc(self.file, d.line, d.col, last.line if j is not None else self.src.count("\n") + 1, d.offset, end_off)
            reason = "preprocessor-conditional" if j is not None else "syntax-error"
            self.unit.items.append(A.OpaqueRegion(reason, " ".join(words[:2]), loc=loc, text=text))
            while self.peek() is not None and self.peek().offset < end_off:
                self.p += 1
            return (j + 1) if j is not None else len(directives)
        loc = self._dloc(d)
        if head == "include":
            rest = d.text[d.text.index("include") + len("include"):].strip()
            system = rest.startswith("<")
            target = rest.strip('<>"').strip() if rest else ""
            if not system and '"' in rest:
                target = rest.split('"')[1]
            self.unit.directives.append(A.Directive("include", d.text, loc, target=target, system=system))
        elif head == "define" and len(words) >= 2:
            self._define(d, words, loc)
        elif head in ("undef", "pragma"):
            self.unit.directives.append(A.Directive(head, d.text, loc, target=words[1] if len(words) > 1 else ""))
        else:
            self.unit.directives.append(A.Directive("other", d.text, loc, target=head))
        return i + 1

    def _define(self, d: Token, words: list[str], loc: A.Loc) -> None:
        name_part = d.text[1:].lstrip()[len("define"):].lstrip()
        ident_end = 0
        while ident_end < len(name_part) and (name_part[ident_end].isalnum() or name_part[ident_end] == "_"):
            ident_end += 1
        name = name_part[:ident_end]
        if name_part[ident_end:ident_end + 1] == "(":
            self.unit.items.append(
                A.OpaqueRegion("unsupported-construct", "function-macro", loc=loc, text=self.slice_text(d.offset, d.end))
            )
            return
        value = name_part[ident_end:].replace("\\\n", " ").strip()
        literal = None
        if value:
            try:
                vtoks = [t for t in tokenize(value, self.file) if t.kind != TokenKind.COMMENT]
            except Exception:
                vtoks = []
            if vtoks and all(t.kind in (TokenKind.INT, TokenKind.FLOAT, TokenKind.STRING, TokenKind.CHAR)
                             or t.text in ("-", "(", ")", "+") for t in vtoks):
                sub = Parser(vtoks, value, self.file, "define")
                try:
                    literal = sub.expression()
                    if sub.peek() is not None:
                        literal = None
                except ParseError:
                    literal = None
        if literal is None:
            self.unit.directives.append(A.Directive("define", d.text, loc, target=name))
            return
        kinds = {t.kind for t in vtoks}
        if TokenKind.STRING in kinds:
            ty = A.TypeRef("char", 1, is_const=True)
        elif TokenKind.FLOAT in kinds:
            ty = A.TypeRef("double")
        elif TokenKind.CHAR in kinds:
            ty = A.TypeRef("char")
        else:
            ty = A.TypeRef("int")
        ty = A.TypeRef(ty.base, ty.pointer_depth, is_const=True)
        self.unit.items.append(
            A.GlobalVarDecl(A.VarDecl(name, ty, literal), from_define=True, loc=loc, text=self.slice_text(d.offset, d.end))
        )

    def _recover_top(self, start: int, exc: ParseError) -> None:
        end = self._sync(start)
        reason = exc.reason
        detail = exc.detail
        loc = self.loc(start, end)
        region = A.OpaqueRegion(reason, detail, loc=loc, text=self.text(start, end))
        region.comments = self.leading_comments(start)
        self.unit.items.append(region)
        self.p = end + 1

    def _sync(self, start: int) -> int:
        """Index of the last token of the region starting at ``start``."""
        depth = 0
        i = start
        n = len(self.sig)
        while i < n:
            t = self.sig[i]
            if t.kind == TokenKind.PUNCT:
                if t.text in ("{", "(", "["):
                    depth += 1
                elif t.text in ("}", ")", "]"):
                    depth -= 1
                    if depth <= 0 and t.text == "}":
                        if i + 1 < n and self.sig[i + 1].text == ";":
                            return i + 1
                        return i
                    if depth < 0:
                        return max(i - 1, start)
                elif t.text == ";" and depth == 0:
                    return i
            i += 1
        return n - 1

    # ------------------------------------------------------ declarations

    def external_declaration(self) -> list:
        t = self.peek()
        if t.text == ";":
            self.next()
            return []
        if t.text == "using":
            return self._using()
        if t.text == "template":
            raise unsupported("template", t)
        if t.text == "namespace":
            raise unsupported("namespace", t)
        if t.text in ("enum", "union"):
            raise unsupported(t.text, t)
        if t.text == "extern" and self.peek(1) is not None and self.peek(1).kind == TokenKind.STRING:
            raise unsupported("linkage-specification", t)
        if t.text == "typedef":
            return self._typedef()
        if t.text in ("class", "struct") and self.peek(1) is not None and self.peek(1).kind == TokenKind.IDENT:
            nxt = self.peek(2)
            if nxt is not None and nxt.text in ("{", ":", ";"):
                return [self._class()]
        return self._declaration()

    def _using(self) -> list:
        start = self.p
        self.expect("using")
        if self.accept("namespace"):
            name = self._qualified_ident()
            end = self.p
            self.expect(";")
            self.unit.directives.append(A.Directive("using", self.text(start, end), self.loc(start, end), target=name))
            return []
        name = self.ident()
        self.expect("=")
        ty = self.type_name()
        end = self.p
        self.expect(";")
        self.type_names.add(name)
        return [A.TypedefDecl(name, ty, loc=self.loc(start, end), text=self.text(start, end))]

    def _typedef(self) -> list:
        start = self.p
        self.expect("typedef")
        out = []
        if self.at("struct") and (self.at("{", 1) or (self.peek(1) and self.peek(1).kind == TokenKind.IDENT and self.at("{", 2))):
            self.next()
            tag = self.ident() if not self.at("{") else None
            fields = self._record_body(tag or "")
            alias = self.ident()
            end = self.p
            self.expect(";")
            name = tag or alias
            self.type_names.update({name, alias})
            out.append(A.RecordDecl(name, fields, loc=self.loc(start, end), text=self.text(start, end)))
            if tag and alias != tag:
                out.append(A.TypedefDecl(alias, A.TypeRef(tag), loc=self.loc(start, end), text=self.text(start, end)))
            return out
        base, const = self.type_base()
        ty, name = self.declarator(base, const)
        if name is None:
            raise ParseError("typedef without a name", self.peek())
        end = self.p
        self.expect(";")
        self.type_names.add(name)
        return [A.TypedefDecl(name, ty, loc=self.loc(start, end), text=self.text(start, end))]

    def _record_body(self, name: str) -> list[A.FieldDecl]:
        self.expect("{")
        fields = []
        while not self.at("}"):
            fstart = self.p
            base, const = self.type_base()
            while True:
                ty, fname = self.declarator(base, const)
                if fname is None:
                    raise ParseError("field without a name", self.peek())
                fields.append(A.FieldDecl(fname, ty, is_const=ty.is_const or ty.const_ptr, loc=self.loc(fstart, self.p - 1),
                                          text=self.text(fstart, self.p - 1)))
                if not self.accept(","):
                    break
            self.expect(";")
        self.expect("}")
        return fields

    def _class(self) -> A.Decl:
        start = self.p
        kw = self.next().text
        name = self.ident()
        self.type_names.add(name)
        if self.at(";"):
            self.next()
            loc, text = self.loc(start, self.p - 1), self.text(start, self.p - 1)
            if kw == "struct":
                return A.RecordDecl(name, [], is_forward=True, loc=loc, text=text)
            return A.ClassDecl(name, is_struct=False, is_forward=True, loc=loc, text=text)
        bases = []
        if self.accept(":"):
            while True:
                while self.peek() is not None and self.peek().text in ("public", "private", "protected", "virtual"):
                    self.next()
                bases.append(self._qualified_ident())
                if not self.accept(","):
                    break
            if len(bases) > 1:
                raise unsupported("multiple-inheritance", self.peek())
        self.class_stack.append(name)
        try:
            members = self._class_body(name, "public" if kw == "struct" else "private")
        finally:
            self.class_stack.pop()
        end = self.p
        self.expect(";")
        loc, text = self.loc(start, end), self.text(start, end)
        simple = kw == "struct" and not bases and all(
            isinstance(m, A.FieldDecl) or (isinstance(m, A.AccessLabel) and m.access == "public") for m in members
        )
        if simple:
            return A.RecordDecl(name, [m for m in members if isinstance(m, A.FieldDecl)], loc=loc, text=text)
        return A.ClassDecl(name, members, bases, is_struct=(kw == "struct"), loc=loc, text=text)

    def _class_body(self, cname: str, access: str) -> list:
        self.expect("{")
        members: list = []
        while not self.at("}"):
            if self.peek() is None:
                raise ParseError("unterminated class body")
            mstart = self.p
            try:
                new, access = self._member(cname, access)
            except ParseError as exc:
                self.p = mstart
                end = self._sync_member(mstart)
                new = [A.MemberOpaque(exc.reason, exc.detail, loc=self.loc(mstart, end), text=self.text(mstart, end))]
                self.p = end + 1
            if new:
                comments = self.leading_comments(mstart)
                if comments:
                    new[0].comments = comments
            members.extend(new)
        self.expect("}")
        return members

    def _sync_member(self, start: int) -> int:
        depth = 0
        i = start
        while i < len(self.sig):
            t = self.sig[i]
            if t.text in ("{", "(", "[") and t.kind == TokenKind.PUNCT:
                depth += 1
            elif t.text in ("}", ")", "]") and t.kind == TokenKind.PUNCT:
                if depth == 0:
                    return max(i - 1, start)
                depth -= 1
                if depth == 0 and t.text == "}":
                    if i + 1 < len(self.sig) and self.sig[i + 1].text == ";":
                        return i + 1
                    return i
            elif t.text == ";" and depth == 0:
                return i
            i += 1
        return len(self.sig) - 1

    def _member(self, cname: str, access: str) -> tuple[list, str]:
        start = self.p
        t = self.peek()
        if t.text in ("public", "private", "protected") and self.at(":", 1):
            self.p += 2
            return [A.AccessLabel(t.text, loc=self.loc(start, start + 1), text=self.text(start, start + 1))], t.text
        if t.text == ";":
            self.next()
            return [], access
        if t.text == "friend":
            raise unsupported("friend-class", t)
        if t.text == "template":
            raise unsupported("template", t)
        if t.text in ("typedef", "using", "enum", "union") or (t.text in ("class", "struct") and self.at("{", 2)):
            raise unsupported("nested-type", t)
        flags = self._specifiers()
        if self.at("~"):
            self.next()
            name = self.ident()
            if name != cname:
                raise ParseError("destructor name mismatch", self.peek())
            fn = self._function_rest(start, name, None, flags, kind="destructor", access=access)
            return [fn], access
        if self.peek() is not None and self.peek().text == cname and self.at("(", 1):
            self.next()
            fn = self._function_rest(start, cname, None, flags, kind="constructor", access=access)
            return [fn], access
        base, const = self.type_base()
        out = []
        while True:
            if self.at("operator"):
                raise unsupported("operator-overloading", self.peek())
            ty, name = self.declarator(base, const)
            if name is None:
                raise ParseError("member without a name", self.peek())
            if self.at("("):
                if "static" in flags:
                    flags = flags | {"static"}
                fn = self._function_rest(start, name, ty, flags, kind="method", access=access)
                return [fn], access
            if "static" in flags:
                raise unsupported("static-member", self.peek())
            if self.at(":"):
                raise unsupported("bit-field", self.peek())
            default = None
            if self.accept("="):
                default = self.assignment()
            elif self.at("{"):
                default = self._brace_init()
            out.append((name, ty, default))
            if not self.accept(","):
                break
        end = self.p
        self.expect(";")
        loc, text = self.loc(start, end), self.text(start, end)
        fields = [A.FieldDecl(n, ty, is_const=ty.is_const or ty.const_ptr, access=access, default=d, loc=loc, text=text)
                  for n, ty, d in out]
        return fields, access

    def _specifiers(self) -> set[str]:
        flags = set()
        while True:
            t = self.peek()
            if t is None:
                return flags
            if t.text in DECL_SPECIFIERS and t.kind == TokenKind.KEYWORD:
                flags.add(t.text)
            elif t.kind == TokenKind.IDENT and t.text in INLINE_MACROS:
                flags.add("inline")
            else:
                return flags
            self.next()

    def _declaration(self) -> list:
        start = self.p
        flags = self._specifiers()
        # qualified constructor / destructor: X::X( or X::~X(
        t0, t1, t2 = self.peek(), self.peek(1), self.peek(2)
        if t0 is not None and t0.kind == TokenKind.IDENT and t1 is not None and t1.text == "::":
            if t2 is not None and t2.text == "~":
                self.p += 3
                name = self.ident()
                return [self._function_rest(start, name, None, flags, kind="destructor", qualifier=t0.text)]
            if t2 is not None and t2.text == t0.text and self.at("(", 3):
                self.p += 3
                return [self._function_rest(start, t0.text, None, flags, kind="constructor", qualifier=t0.text)]
        base, const = self.type_base()
        flags |= self._specifiers()
        items = []
        while True:
            if self.at("operator"):
                raise unsupported("operator-overloading", self.peek())
            ty, name, qualifier = self._declarator_q(base, const)
            if name is None:
                raise ParseError("declaration without a name", self.peek())
            if name == "operator":
                raise unsupported("operator-overloading", self.peek())
            if self.at("(") and not items:
                kind = "method" if qualifier else "function"
                return [self._function_rest(start, name, ty, flags, kind=kind, qualifier=qualifier)]
            if qualifier:
                raise unsupported("static-member", self.peek())
            var = self._var_rest(name, ty, flags)
            items.append(var)
            if not self.accept(","):
                break
        end = self.p
        self.expect(";")
        loc, text = self.loc(start, end), self.text(start, end)
        return [
            A.GlobalVarDecl(v, is_static="static" in flags, is_extern="extern" in flags, loc=loc, text=text)
            for v in items
        ]

    def _var_rest(self, name: str, ty: A.TypeRef, flags: set[str]) -> A.VarDecl:
        var = A.VarDecl(name, ty, is_static="static" in flags, is_auto=(ty.base == "auto"))
        if self.accept("="):
            if self.at("{"):
                var.init = self._brace_init()
            else:
                var.init = self.assignment()
        elif self.at("("):
            self.next()
            var.ctor_args = self._args(")")
        elif self.at("{"):
            init = self._brace_init()
            if ty.base in ("std::vector",) or ty.is_array:
                var.init = init
            else:
                var.ctor_args = init.items
        return var

    def _brace_init(self) -> A.InitList:
        self.expect("{")
        items = []
        while not self.at("}"):
            if self.at("{"):
                items.append(self._brace_init())
            else:
                items.append(self.assignment())
            if not self.accept(","):
                break
        self.expect("}")
        return A.InitList(items)

    def _function_rest(self, start: int, name: str, ret: Optional[A.TypeRef], flags: set[str], *, kind: str,
                       qualifier: Optional[str] = None, access: str = "public") -> A.FunctionDecl:
        params = self._params()
        fn = A.FunctionDecl(
            name, ret, params, qualifier=qualifier, kind=kind,
            is_inline="inline" in flags, is_static="static" in flags, is_virtual="virtual" in flags, access=access,
        )
        if self.class_stack and kind == "method":
            fn.qualifier = None
        while self.peek() is not None and self.peek().text in ("const", "override", "final", "noexcept"):
            if self.next().text == "const":
                fn.is_const_method = True
        if self.at("=") :
            self.next()
            t = self.next()
            if t.text == "0":
                raise unsupported("pure-virtual", t)
            if t.text in ("default", "delete"):
                raise unsupported(f"{t.text}ed-special-member", t)
            raise ParseError("unexpected initializer on function", t)
        if kind == "constructor" and self.accept(":"):
            while True:
                mname = self._qualified_ident()
                if self.at("("):
                    self.next()
                    args = self._args(")")
                elif self.at("{"):
                    args = self._brace_init().items
                else:
                    raise ParseError("expected member initializer", self.peek())
                fn.init_list.append((mname, args))
                if not self.accept(","):
                    break
        if self.at(";"):
            end = self.p
            self.next()
        elif self.at("{"):
            self.class_stack.append(qualifier or (self.class_stack[-1] if self.class_stack else ""))
            try:
                fn.body = self.compound()
            finally:
                self.class_stack.pop()
            end = self.p - 1
        else:
            raise ParseError("expected function body", self.peek())
        fn.loc = self.loc(start, end)
        fn.text = self.text(start, end)
        return fn

    def _params(self) -> list[A.Param]:
        self.expect("(")
        params = []
        if self.at("void") and self.at(")", 1):
            self.p += 2
            return params
        while not self.at(")"):
            if self.at("..."):
                raise unsupported("variadic-function", self.peek())
            self._specifiers()
            base, const = self.type_base()
            ty, name = self.declarator(base, const, allow_abstract=True)
            default = None
            if self.accept("="):
                default = self.assignment()
            params.append(A.Param(name, ty, default))
            if not self.accept(","):
                break
        self.expect(")")
        return params

    # -------------------------------------------------------------- types

    def _qualified_ident(self) -> str:
        parts = [self.ident()]
        while self.at("::") and self.peek(1) is not None and self.peek(1).kind == TokenKind.IDENT:
            self.p += 1
            parts.append(self.ident())
        return "::".join(parts)

    def type_base(self) -> tuple[A.TypeRef, bool]:
        """Parse type specifiers; returns a pointer-free TypeRef and its const flag."""
        const = False
        words: list[str] = []
        base: Optional[str] = None
        args: tuple = ()
        while True:
            t = self.peek()
            if t is None:
                break
            if t.text in ("const", "volatile") and t.kind == TokenKind.KEYWORD:
                const |= t.text == "const"
                self.next()
            elif t.kind == TokenKind.KEYWORD and t.text in SCALAR_WORDS and base is None:
                words.append(t.text)
                self.next()
            elif t.text in ("struct", "class") and base is None and not words:
                self.next()
                base = self.ident()
            elif t.text in ("enum", "union") and base is None and not words:
                raise unsupported(t.text, t)
            elif t.text == "auto" and base is None and not words:
                self.next()
                base = "auto"
            elif t.text in ("register", "static", "inline", "extern", "mutable", "constexpr"):
                self.next()
            elif t.kind == TokenKind.IDENT and base is None and not words:
                save = self.p
                name = self._qualified_ident()
                if name in TEMPLATE_TYPES and self.at("<"):
                    base = TEMPLATE_TYPES[name]
                    args = self._template_args()
                elif self.at("<"):
                    raise unsupported("template", self.peek())
                elif name in STD_TYPES:
                    base = STD_TYPES[name]
                else:
                    base = name
                if save == self.p:
                    break
            else:
                break
        if base is None:
            if not words:
                raise ParseError("expected a type", self.peek())
            base = normalize_scalar(words)
        return A.TypeRef(base, is_const=const, args=args), const

    def _template_args(self) -> tuple:
        self.expect("<")
        args = []
        while True:
            args.append(self.type_name())
            if self.accept(","):
                continue
            break
        t = self.peek()
        if t is not None and t.text == ">>":
            # split '>>' closing two template lists
            self.sig[self.p] = Token(TokenKind.PUNCT, ">", t.line, t.col + 1, t.offset + 1)
            self.sig_offsets[self.p] = t.offset + 1
        else:
            self.expect(">")
        return tuple(args)

    def type_name(self) -> A.TypeRef:
        base, const = self.type_base()
        ty, _ = self.declarator(base, const, allow_abstract=True)
        return ty

    def declarator(self, base: A.TypeRef, const: bool, allow_abstract: bool = False):
        ty, name, qualifier = self._declarator_q(base, const, allow_abstract)
        if qualifier:
            raise ParseError("unexpected qualified name", self.peek())
        return ty, name

    def _declarator_q(self, base: A.TypeRef, const: bool, allow_abstract: bool = False):
        depth = 0
        const_ptr = False
        ref = False
        while True:
            if self.accept("*"):
                depth += 1
                const_ptr = False
                while self.peek() is not None and self.peek().text in ("const", "volatile"):
                    const_ptr |= self.next().text == "const"
            elif self.at("&") or self.at("&&"):
                if ref:
                    raise unsupported("reference-to-reference", self.peek())
                self.next()
                ref = True
            else:
                break
        if self.at("(") and (self.at("*", 1) or self.at("&", 1)):
            raise unsupported("function-pointer", self.peek())
        name = None
        qualifier = None
        t = self.peek()
        if t is not None and (t.kind == TokenKind.IDENT or t.text == "operator"):
            if t.text == "operator":
                raise unsupported("operator-overloading", t)
            name = self.ident()
            if self.at("::") and self.peek(1) is not None and (self.peek(1).kind == TokenKind.IDENT or self.peek(1).text in ("~", "operator")):
                self.next()
                if self.at("operator"):
                    raise unsupported("operator-overloading", self.peek())
                qualifier, name = name, self.ident()
        elif not allow_abstract:
            raise ParseError("expected declarator name", t)
        extent = None
        unsized = False
        if self.at("["):
            self.next()
            if self.at("]"):
                unsized = True
            else:
                extent = self.expression()
            self.expect("]")
            if self.at("["):
                raise unsupported("multi-dimensional-array", self.peek())
        ty = A.TypeRef(
            base.base, depth, ref, base.is_const or const, const_ptr, extent, unsized, base.args
        )
        return ty, name, qualifier

    def is_type_start(self, k: int = 0) -> bool:
        t = self.peek(k)
        if t is None:
            return False
        if t.kind == TokenKind.KEYWORD:
            return t.text in TYPE_START_KEYWORDS
        if t.kind == TokenKind.IDENT:
            name = t.text
            j = k + 1
            while self.at("::", j) and self.peek(j + 1) is not None and self.peek(j + 1).kind == TokenKind.IDENT:
                name += "::" + self.peek(j + 1).text
                j += 2
            return name in self.type_names or name in STD_TYPES or name in TEMPLATE_TYPES
        return False

    # --------------------------------------------------------- statements

    def compound(self) -> A.CompoundStmt:
        start = self.p
        self.expect("{")
        body = []
        while not self.at("}"):
            if self.peek() is None:
                raise ParseError("unterminated block")
            body.append(self.statement_recovering())
        end = self.p
        self.expect("}")
        return A.CompoundStmt(body, loc=self.loc(start, end), text=self.text(start, end))

    def statement_recovering(self) -> A.Stmt:
        start = self.p
        try:
            st = self.statement()
        except ParseError as exc:
            self.p = start
            end = self._sync_stmt(start)
            st = A.OpaqueStmt(exc.reason, exc.detail, loc=self.loc(start, end), text=self.text(start, end))
            self.p = end + 1
        if not st.comments:
            st.comments = self.leading_comments(start)
        if st.trailing_comment is None and self.p - 1 >= start and not isinstance(st, A.CompoundStmt):
            st.trailing_comment = self.trailing_comment(self.p - 1)
        return st

    def _sync_stmt(self, start: int) -> int:
        depth = 0
        i = start
        while i < len(self.sig):
            t = self.sig[i]
            if t.kind == TokenKind.PUNCT:
                if t.text in ("{", "(", "["):
                    depth += 1
                elif t.text in ("}", ")", "]"):
                    if depth == 0:
                        return max(i - 1, start)
                    depth -= 1
                    if depth == 0 and t.text == "}":
                        nxt = self.sig[i + 1] if i + 1 < len(self.sig) else None
                        if nxt is not None and nxt.text == ";":
                            return i + 1
                        if nxt is not None and nxt.text == "catch":
                            i += 1
                            continue
                        return i
                elif t.text == ";" and depth == 0:
                    return i
            i += 1
        return len(self.sig) - 1

    def _finish(self, st: A.Stmt, start: int) -> A.Stmt:
        end = self.p - 1
        st.loc = self.loc(start, end)
        st.text = self.text(start, end)
        return st

    def statement(self) -> A.Stmt:
        start = self.p
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input")
        tx = t.text
        if t.kind == TokenKind.PUNCT and tx == "{":
            return self.compound()
        if t.kind == TokenKind.KEYWORD:
            if tx == "if":
                self.next()
                self.expect("(")
                cond = self.expression()
                self.expect(")")
                then = self.statement_recovering()
                other = None
                if self.accept("else"):
                    other = self.statement_recovering()
                return self._finish(A.IfStmt(cond, then, other), start)
            if tx == "while":
                self.next()
                self.expect("(")
                cond = self.expression()
                self.expect(")")
                body = self.statement_recovering()
                return self._finish(A.WhileStmt(cond, body), start)
            if tx == "do":
                self.next()
                body = self.statement_recovering()
                self.expect("while")
                self.expect("(")
                cond = self.expression()
                self.expect(")")
                self.expect(";")
                return self._finish(A.DoWhileStmt(body, cond), start)
            if tx == "for":
                return self._for(start)
            if tx == "return":
                self.next()
                value = None if self.at(";") else self.expression()
                self.expect(";")
                return self._finish(A.ReturnStmt(value), start)
            if tx in ("break", "continue"):
                self.next()
                self.expect(";")
                return self._finish(A.BreakStmt() if tx == "break" else A.ContinueStmt(), start)
            if tx == "goto":
                self.next()
                label = self.ident()
                self.expect(";")
                return self._finish(A.GotoStmt(label), start)
            if tx == "switch":
                self.next()
                self.expect("(")
                cond = self.expression()
                self.expect(")")
                body = self.compound()
                return self._finish(A.SwitchStmt(cond, body), start)
            if tx == "case":
                self.next()
                value = self.ternary()
                self.expect(":")
                return self._finish(A.CaseStmt(value), start)
            if tx == "default" and self.at(":", 1):
                self.p += 2
                return self._finish(A.CaseStmt(None), start)
            if tx in ("try", "throw"):
                raise unsupported("exception", t)
            if tx == "using":
                while not self.at(";"):
                    self.next()
                self.next()
                return self._finish(A.EmptyStmt(), start)
            if tx in ("typedef", "enum", "union", "template"):
                raise unsupported("local-type" if tx != "template" else "template", t)
            if tx in ("class", "struct") and (self.at("{", 2) or self.at(":", 2)):
                raise unsupported("local-type", t)
        if t.kind == TokenKind.PUNCT and tx == ";":
            self.next()
            return self._finish(A.EmptyStmt(), start)
        if t.kind == TokenKind.IDENT and self.at(":", 1):
            self.p += 2
            return self._finish(A.LabelStmt(tx), start)
        if self.looks_like_declaration():
            decls = self._local_decls()
            self.expect(";")
            return self._finish(A.DeclStmt(decls), start)
        expr = self.expression()
        self.expect(";")
        return self._finish(A.ExprStmt(expr), start)

    def _for(self, start: int) -> A.Stmt:
        self.expect("for")
        self.expect("(")
        init = None
        if self.looks_like_declaration():
            istart = self.p
            save = self.p
            self._specifiers()
            base, const = self.type_base()
            ty, name = self.declarator(base, const)
            if self.accept(":"):
                iterable = self.expression()
                self.expect(")")
                body = self.statement_recovering()
                return self._finish(A.RangeForStmt(A.VarDecl(name, ty, is_auto=ty.base == "auto"), iterable, body), start)
            self.p = save
            decls = self._local_decls()
            self.expect(";")
            init = self._finish(A.DeclStmt(decls), istart)
        elif self.at(";"):
            self.next()
        else:
            istart = self.p
            e = self.expression()
            self.expect(";")
            init = self._finish(A.ExprStmt(e), istart)
        cond = None if self.at(";") else self.expression()
        self.expect(";")
        step = None if self.at(")") else self.expression()
        self.expect(")")
        body = self.statement_recovering()
        return self._finish(A.ForStmt(init, cond, step, body), start)

    def _local_decls(self) -> list[A.VarDecl]:
        flags = self._specifiers()
        base, const = self.type_base()
        flags |= self._specifiers()
        out = []
        while True:
            ty, name = self.declarator(base, const)
            if name is None:
                raise ParseError("declaration without a name", self.peek())
            if self.at("(") and self.peek(1) is not None and self.is_type_start(1):
                raise unsupported("local-function-declaration", self.peek())
            out.append(self._var_rest(name, ty, flags))
            if not self.accept(","):
                break
        return out

    def looks_like_declaration(self) -> bool:
        t = self.peek()
        if t is None:
            return False
        if t.kind == TokenKind.KEYWORD:
            return t.text in TYPE_START_KEYWORDS or t.text in ("static", "register", "constexpr")
        if t.kind != TokenKind.IDENT:
            return False
        if t.text in INLINE_MACROS:
            return False
        j = 1
        while self.at("::", j) and self.peek(j + 1) is not None and self.peek(j + 1).kind == TokenKind.IDENT:
            j += 2
        nxt = self.peek(j)
        if nxt is None:
            return False
        if nxt.text == "<":
            return self.is_type_start(0)
        if nxt.kind == TokenKind.IDENT:
            return True
        if nxt.text in ("*", "&"):
            k = j
            while self.peek(k) is not None and self.peek(k).text in ("*", "&", "const"):
                k += 1
            after = self.peek(k)
            after2 = self.peek(k + 1)
            if after is not None and after.kind == TokenKind.IDENT and after2 is not None and after2.text in ("=", ";", ",", "[", ")", "("):
                return self.is_type_start(0) or after2.text != "("
        return False

    # -------------------------------------------------------- expressions

    def expression(self) -> A.Expr:
        e = self.assignment()
        while self.at(","):
            self.next()
            e = A.Comma(e, self.assignment())
        return e

    def assignment(self) -> A.Expr:
        lhs = self.ternary()
        t = self.peek()
        if t is not None and t.kind == TokenKind.PUNCT and t.text in ASSIGN_OPS:
            self.next()
            return A.Assign(t.text, lhs, self.assignment())
        return lhs

    def ternary(self) -> A.Expr:
        cond = self.binary(1)
        if self.accept("?"):
            then = self.expression()
            self.expect(":")
            other = self.assignment()
            return A.Ternary(cond, then, other)
        return cond

    def binary(self, min_prec: int) -> A.Expr:
        left = self.unary()
        while True:
            t = self.peek()
            if t is None or t.kind != TokenKind.PUNCT or t.text not in BINARY_PREC:
                return left
            prec = BINARY_PREC[t.text]
            if prec < min_prec:
                return left
            self.next()
            right = self.binary(prec + 1)
            left = A.Binary(t.text, left, right)

    def unary(self) -> A.Expr:
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input")
        if t.kind == TokenKind.PUNCT and t.text in ("-", "+", "!", "~", "*", "&", "++", "--"):
            self.next()
            return A.Unary(t.text, self.unary())
        if t.kind == TokenKind.KEYWORD:
            if t.text == "sizeof":
                self.next()
                if self.at("(") and self.is_type_start(1):
                    self.next()
                    ty = self.type_name()
                    self.expect(")")
                    return A.SizeOf(type=ty)
                return A.SizeOf(expr=self.unary())
            if t.text == "new":
                return self._new()
            if t.text == "delete":
                self.next()
                array = False
                if self.at("[") and self.at("]", 1):
                    self.p += 2
                    array = True
                return A.Delete(self.unary(), array)
        if t.kind == TokenKind.PUNCT and t.text == "(" and self.is_type_start(1):
            save = self.p
            self.next()
            try:
                ty = self.type_name()
                self.expect(")")
            except ParseError:
                self.p = save
            else:
                inner = self.unary()
                return self._fuse_malloc(A.Cast(ty, inner, "c"))
        return self.postfix(self.primary())

    def _new(self) -> A.Expr:
        self.expect("new")
        if self.at("("):
            raise unsupported("placement-new", self.peek())
        base, const = self.type_base()
        depth = 0
        while self.accept("*"):
            depth += 1
        ty = A.TypeRef(base.base, depth, is_const=const, args=base.args)
        if self.accept("["):
            count = self.expression()
            self.expect("]")
            return A.HeapAlloc(ty, count=count)
        if self.at("("):
            self.next()
            return A.HeapAlloc(ty, args=self._args(")"))
        if self.at("{"):
            return A.HeapAlloc(ty, args=self._brace_init().items)
        return A.HeapAlloc(ty)

    @staticmethod
    def _fuse_malloc(cast: A.Cast) -> A.Expr:
        inner = cast.expr
        if not (cast.type.pointer_depth == 1 and isinstance(inner, A.Call) and isinstance(inner.func, A.Name)):
            return cast
        fname = inner.func.name
        elem = A.TypeRef(cast.type.base, args=cast.type.args)

        def sizeof_elem(e):
            return isinstance(e, A.SizeOf) and e.type is not None and e.type.base == elem.base and e.type.pointer_depth == 0

        if fname == "malloc" and len(inner.args) == 1:
            arg = inner.args[0]
            if sizeof_elem(arg):
                return A.HeapAlloc(elem, origin="malloc")
            if isinstance(arg, A.Binary) and arg.op == "*":
                if sizeof_elem(arg.right):
                    return A.HeapAlloc(elem, count=arg.left, origin="malloc")
                if sizeof_elem(arg.left):
                    return A.HeapAlloc(elem, count=arg.right, origin="malloc")
        if fname == "calloc" and len(inner.args) == 2 and sizeof_elem(inner.args[1]):
            return A.HeapAlloc(elem, count=inner.args[0], zeroed=True, origin="malloc")
        return cast

    def _args(self, close: str) -> list[A.Expr]:
        args = []
        while not self.at(close):
            args.append(self.assignment())
            if not self.accept(","):
                break
        self.expect(close)
        return args

    def postfix(self, e: A.Expr) -> A.Expr:
        while True:
            t = self.peek()
            if t is None or t.kind != TokenKind.PUNCT:
                return e
            if t.text == "(":
                self.next()
                e = A.Call(e, self._args(")"))
            elif t.text == "[":
                self.next()
                idx = self.expression()
                self.expect("]")
                e = A.Index(e, idx)
            elif t.text in (".", "->"):
                self.next()
                e = A.Member(e, self.ident(), t.text == "->")
            elif t.text in ("++", "--"):
                self.next()
                e = A.Unary(t.text, e, postfix=True)
            else:
                return e

    def primary(self) -> A.Expr:
        t = self.next()
        k = t.kind
        if k == TokenKind.INT:
            return A.Literal("int", t.text)
        if k == TokenKind.FLOAT:
            return A.Literal("float", t.text)
        if k == TokenKind.CHAR:
            return A.Literal("char", t.text)
        if k == TokenKind.STRING:
            parts = [t.text]
            while self.peek() is not None and self.peek().kind == TokenKind.STRING:
                parts.append(self.next().text)
            return A.Literal("string", " ".join(parts))
        if k == TokenKind.KEYWORD:
            if t.text in ("true", "false"):
                return A.Literal("bool", t.text)
            if t.text == "nullptr":
                return A.Literal("null", t.text)
            if t.text == "this":
                return A.This()
            if t.text in ("static_cast", "const_cast", "reinterpret_cast", "dynamic_cast"):
                self.expect("<")
                ty = self.type_name()
                self.expect(">")
                self.expect("(")
                inner = self.expression()
                self.expect(")")
                style = t.text.split("_")[0]
                if style == "dynamic":
                    raise unsupported("dynamic-cast", t)
                return A.Cast(ty, inner, style)
            if t.text in SCALAR_WORDS and self.at("("):
                self.p -= 1
                base, _ = self.type_base()
                self.expect("(")
                inner = self.expression()
                self.expect(")")
                return A.Cast(base, inner, "functional")
            raise ParseError(f"unexpected keyword {t.text!r}", t)
        if k == TokenKind.IDENT:
            if t.text == "NULL":
                return A.Literal("null", t.text)
            parts = [t.text]
            while self.at("::") and self.peek(1) is not None and self.peek(1).kind == TokenKind.IDENT:
                self.next()
                parts.append(self.next().text)
            if self.at("<") and "::".join(parts) in TEMPLATE_TYPES:
                raise unsupported("template", self.peek())
            return A.Name(parts[-1], tuple(parts[:-1]))
        if k == TokenKind.PUNCT:
            if t.text == "(":
                e = self.expression()
                self.expect(")")
                return e
            if t.text == "::":
                return self.primary()
            if t.text == "[":
                raise unsupported("lambda", t)
        raise ParseError(f"unexpected token {t.text!r}", t)


def parse_unit(tokens: list[Token], unit_name: str, source: Optional[str] = None, file: Optional[str] = None) -> A.TranslationUnit:
    """Parse a token list into a :class:`TranslationUnit`; never raises on bad input."""
    if source is None:
        from .lexer import detokenize

        source = detokenize(tokens, "")  # gaps unknown; offsets still index into this text
        source = _rebuild(tokens)
    file = file or unit_name
    return Parser(tokens, source, file, unit_name).parse()


def _rebuild(tokens: list[Token]) -> str:
    # best-effort source for token lists that arrive without their text
    out = []
    pos = 0
    for t in tokens:
        if t.offset > pos:
            out.append(" " * (t.offset - pos))
        out.append(t.text)
        pos = t.offset + len(t.text)
    return "".join(out)


def parse_source(source: str, unit_name: str, file: Optional[str] = None) -> A.TranslationUnit:
    file = file or unit_name
    return parse_unit(tokenize(source, file), unit_name, source, file)
