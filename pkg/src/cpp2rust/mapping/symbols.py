"""Symbol records shared by the expression and statement lowerings."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..frontend import ast as A
from .ledger import Unconvertible
from .types import RType, zero_value

RUST_KEYWORDS = frozenset(
    """
    as async await become box break const continue crate do dyn else enum extern
    false final fn for gen if impl in let loop macro match mod move mut override
    priv pub ref return self Self static struct super trait true try type typeof
    unsafe unsized use virtual where while yield abstract
    """.split()
)
_UNRAWABLE = {"self", "Self", "super", "crate"}


def rust_ident(name: str) -> str:
    if name in _UNRAWABLE:
        return name + "_"
    if name in RUST_KEYWORDS:
        return "r#" + name
    return name


# expression precedence, loosest to tightest
P_BLOCK, P_ASSIGN, P_OR, P_AND, P_CMP = 5, 10, 25, 30, 35
P_BITOR, P_XOR, P_BITAND, P_SHIFT, P_ADD, P_MUL, P_AS, P_UNARY, P_ATOM = 40, 45, 50, 55, 60, 70, 80, 90, 100

BINARY_PREC = {
    "||": P_OR, "&&": P_AND,
    "==": P_CMP, "!=": P_CMP, "<": P_CMP, ">": P_CMP, "<=": P_CMP, ">=": P_CMP,
    "|": P_BITOR, "^": P_XOR, "&": P_BITAND, "<<": P_SHIFT, ">>": P_SHIFT,
    "+": P_ADD, "-": P_ADD, "*": P_MUL, "/": P_MUL, "%": P_MUL,
}


@dataclass
class R:
    """A lowered expression: target text plus what the rules need to know."""

    code: str
    ty: RType
    prec: int = P_ATOM
    lit: Optional[str] = None  # int | float | char | str | bool | null
    place: bool = False
    addr_of: Optional["R"] = None  # set for ``&x``


def paren(r: R, min_prec: int) -> str:
    return f"({r.code})" if r.prec < min_prec else r.code


@dataclass
class ParamInfo:
    name: str
    rname: str
    ctype: A.TypeRef
    rtype: Optional[RType]
    default: Optional[A.Expr] = None
    mutable: bool = False


@dataclass
class FnSig:
    decl: A.FunctionDecl
    scope: str
    rname: str = ""
    params: list[ParamInfo] = field(default_factory=list)
    ret: Optional[RType] = None
    error: Optional[Unconvertible] = None
    receiver: Optional[str] = None
    is_static: bool = False

    @property
    def kind(self) -> str:
        return self.decl.kind

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def required(self) -> int:
        n = 0
        for p in self.params:
            if p.default is not None:
                break
            n += 1
        return n


@dataclass
class FieldInfo:
    name: str
    rname: str
    ctype: A.TypeRef
    rtype: Optional[RType]
    public: bool
    error: Optional[Unconvertible] = None
    decl: Optional[A.FieldDecl] = None


@dataclass
class RecordInfo:
    name: str
    is_class: bool
    decl: A.Decl
    fields: dict[str, FieldInfo] = field(default_factory=dict)
    base: Optional[str] = None
    lifetime: Optional[str] = None
    ctors: list[FnSig] = field(default_factory=list)
    methods: dict[str, list[FnSig]] = field(default_factory=dict)

    @property
    def rname(self) -> str:
        return rust_ident(self.name)

    def type_text(self) -> str:
        return f"{self.rname}<'{self.lifetime}>" if self.lifetime else self.rname

    def zero_literal(self, records: dict) -> str:
        parts = []
        if self.base is not None:
            base = records.get(self.base)
            if base is None:
                raise Unconvertible("unknown-type", self.base)
            parts.append(f"parent: {base.default_value(records)}")
        for f in self.fields.values():
            if f.rtype is None:
                continue
            parts.append(f"{f.rname}: {zero_value(f.rtype, records)}")
        if not parts:
            return f"{self.rname} {{}}"
        return f"{self.rname} {{ {', '.join(parts)} }}"

    def default_value(self, records: dict) -> str:
        """Value of a default-constructed instance."""
        for c in self.ctors:
            if c.arity == 0 or c.required == 0:
                return f"{self.rname}::{c.rname}()"
        if self.ctors:
            raise Unconvertible("no-default-constructor", self.name)
        return self.zero_literal(records)

    def find_field(self, name: str, records: dict) -> Optional[tuple[list[str], FieldInfo]]:
        """Access path through embedded parents, plus the field."""
        rec: Optional[RecordInfo] = self
        path: list[str] = []
        while rec is not None:
            if name in rec.fields:
                return path + [rec.fields[name].rname], rec.fields[name]
            if rec.base is None:
                return None
            path.append("parent")
            rec = records.get(rec.base)
        return None

    def find_methods(self, name: str, records: dict) -> Optional[tuple[list[str], list[FnSig]]]:
        rec: Optional[RecordInfo] = self
        path: list[str] = []
        while rec is not None:
            if name in rec.methods:
                return path, rec.methods[name]
            if rec.base is None:
                return None
            path.append("parent")
            rec = records.get(rec.base)
        return None


@dataclass
class Sym:
    name: str
    rname: str
    rtype: RType
    kind: str  # local | param | global | const | static
    ctype: Optional[A.TypeRef] = None
    storage: str = ""  # for globals: const | static | lock | unsafe
    loop_depth: int = 0
