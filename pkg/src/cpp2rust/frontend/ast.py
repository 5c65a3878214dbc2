"""Source-side syntax tree for the C/C++ subset.

Nodes are plain dataclasses. Every statement and declaration keeps the
verbatim source slice it was parsed from (``text``) so that the mapping
engine can copy it into an unconverted block without going back to the file.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Loc:
    file: str
    line: int
    col: int
    end_line: int
    start: int  # char offsets into the file
    end: int


NOLOC = Loc("<none>", 0, 0, 0, 0, 0)


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class TypeRef:
    """A parsed type.

    ``base`` is a normalized spelling: ``"unsigned int"``, ``"std::string"``,
    ``"Node"`` and so on. ``is_const`` qualifies the base, ``const_ptr`` the
    outermost pointer. ``array_extent`` holds the declarator's ``[n]`` and
    ``unsized_array`` marks ``[]``.
    """

    base: str
    pointer_depth: int = 0
    is_reference: bool = False
    is_const: bool = False
    const_ptr: bool = False
    array_extent: Optional["Expr"] = None
    unsized_array: bool = False
    args: tuple["TypeRef", ...] = ()

    @property
    def is_array(self) -> bool:
        return self.array_extent is not None or self.unsized_array

    @property
    def is_pointer(self) -> bool:
        return self.pointer_depth > 0

    def element(self) -> "TypeRef":
        """The type with one array or pointer level removed."""
        if self.is_array:
            return TypeRef(self.base, self.pointer_depth, False, self.is_const, args=self.args)
        return TypeRef(self.base, max(self.pointer_depth - 1, 0), False, self.is_const, args=self.args)

    def spelled(self) -> str:
        s = ("const " if self.is_const else "") + self.base
        if self.args:
            s += "<" + ", ".join(a.spelled() for a in self.args) + ">"
        s += "*" * self.pointer_depth
        if self.is_reference:
            s += "&"
        return s


# ---------------------------------------------------------- expressions


@dataclass
class Expr:
    pass


@dataclass
class Literal(Expr):
    kind: str  # int | float | string | char | bool | null
    text: str


@dataclass
class Name(Expr):
    name: str
    qualifier: tuple[str, ...] = ()

    @property
    def full(self) -> str:
        return "::".join(self.qualifier + (self.name,))


@dataclass
class This(Expr):
    pass


@dataclass
class Unary(Expr):
    op: str
    operand: Expr
    postfix: bool = False


@dataclass
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass
class Assign(Expr):
    op: str
    target: Expr
    value: Expr


@dataclass
class Ternary(Expr):
    cond: Expr
    then: Expr
    other: Expr


@dataclass
class Call(Expr):
    func: Expr
    args: list[Expr]


@dataclass
class Index(Expr):
    base: Expr
    index: Expr


@dataclass
class Member(Expr):
    base: Expr
    name: str
    arrow: bool = False


@dataclass
class Cast(Expr):
    type: TypeRef
    expr: Expr
    style: str = "c"  # c | static | const | reinterpret | functional


@dataclass
class SizeOf(Expr):
    type: Optional[TypeRef] = None
    expr: Optional[Expr] = None


@dataclass
class HeapAlloc(Expr):
    """``new T``, ``new T(args)``, ``new T[n]`` and the malloc-with-sizeof idiom."""

    type: TypeRef
    args: Optional[list[Expr]] = None
    count: Optional[Expr] = None
    zeroed: bool = False
    origin: str = "new"


@dataclass
class Delete(Expr):
    expr: Expr
    array: bool = False


@dataclass
class InitList(Expr):
    items: list[Expr]


@dataclass
class Comma(Expr):
    left: Expr
    right: Expr


# ----------------------------------------------------------- statements


@dataclass
class Stmt:
    loc: Loc = field(default=NOLOC, kw_only=True)
    text: str = field(default="", kw_only=True)
    comments: list[str] = field(default_factory=list, kw_only=True)
    trailing_comment: Optional[str] = field(default=None, kw_only=True)


@dataclass
class VarDecl:
    name: str
    type: TypeRef
    init: Optional[Expr] = None
    ctor_args: Optional[list[Expr]] = None
    is_static: bool = False
    is_auto: bool = False


@dataclass
class CompoundStmt(Stmt):
    body: list[Stmt]


@dataclass
class DeclStmt(Stmt):
    decls: list[VarDecl]


@dataclass
class ExprStmt(Stmt):
    expr: Expr


@dataclass
class IfStmt(Stmt):
    cond: Expr
    then: Stmt
    other: Optional[Stmt] = None


@dataclass
class WhileStmt(Stmt):
    cond: Expr
    body: Stmt


@dataclass
class DoWhileStmt(Stmt):
    body: Stmt
    cond: Expr


@dataclass
class ForStmt(Stmt):
    init: Optional[Stmt]
    cond: Optional[Expr]
    step: Optional[Expr]
    body: Stmt


@dataclass
class RangeForStmt(Stmt):
    var: VarDecl
    iterable: Expr
    body: Stmt


@dataclass
class ReturnStmt(Stmt):
    value: Optional[Expr] = None


@dataclass
class BreakStmt(Stmt):
    pass


@dataclass
class ContinueStmt(Stmt):
    pass


@dataclass
class GotoStmt(Stmt):
    label: str


@dataclass
class LabelStmt(Stmt):
    label: str


@dataclass
class SwitchStmt(Stmt):
    cond: Expr
    body: CompoundStmt


@dataclass
class CaseStmt(Stmt):
    value: Optional[Expr]  # None for default


@dataclass
class EmptyStmt(Stmt):
    pass


@dataclass
class OpaqueStmt(Stmt):
    reason: str
    detail: str


# --------------------------------------------------------- declarations


@dataclass
class Decl:
    loc: Loc = field(default=NOLOC, kw_only=True)
    text: str = field(default="", kw_only=True)
    comments: list[str] = field(default_factory=list, kw_only=True)


@dataclass
class Param:
    name: Optional[str]
    type: TypeRef
    default: Optional[Expr] = None


@dataclass
class GlobalVarDecl(Decl):
    var: VarDecl
    is_static: bool = False
    is_extern: bool = False
    from_define: bool = False

    @property
    def name(self) -> str:
        return self.var.name


@dataclass
class FunctionDecl(Decl):
    name: str
    return_type: Optional[TypeRef]
    params: list[Param]
    body: Optional[CompoundStmt] = None
    qualifier: Optional[str] = None
    kind: str = "function"  # function | method | constructor | destructor
    is_inline: bool = False
    is_static: bool = False
    is_virtual: bool = False
    is_const_method: bool = False
    init_list: list[tuple[str, list[Expr]]] = field(default_factory=list)
    access: str = "public"

    @property
    def qualified_name(self) -> str:
        return f"{self.qualifier}::{self.name}" if self.qualifier else self.name

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass
class FieldDecl(Decl):
    name: str
    type: TypeRef
    is_const: bool = False
    access: str = "public"
    default: Optional[Expr] = None


@dataclass
class MemberOpaque(Decl):
    """A class member the grammar recognizes but the mapping cannot lower."""

    reason: str  # unsupported-construct | syntax-error
    detail: str  # friend-class, operator-overloading, template, ...


@dataclass
class AccessLabel(Decl):
    access: str


Member_ = Union[FieldDecl, FunctionDecl, MemberOpaque, AccessLabel]


@dataclass
class ClassDecl(Decl):
    name: str
    members: list = field(default_factory=list)
    bases: list[str] = field(default_factory=list)
    is_struct: bool = False
    is_forward: bool = False

    @property
    def fields(self) -> list[FieldDecl]:
        return [m for m in self.members if isinstance(m, FieldDecl)]

    @property
    def constructors(self) -> list[FunctionDecl]:
        return [m for m in self.members if isinstance(m, FunctionDecl) and m.kind == "constructor"]

    @property
    def destructor(self) -> Optional[FunctionDecl]:
        for m in self.members:
            if isinstance(m, FunctionDecl) and m.kind == "destructor":
                return m
        return None

    @property
    def methods(self) -> list[FunctionDecl]:
        return [m for m in self.members if isinstance(m, FunctionDecl) and m.kind == "method"]

    @property
    def functions(self) -> list[FunctionDecl]:
        return [m for m in self.members if isinstance(m, FunctionDecl)]


@dataclass
class RecordDecl(Decl):
    """A C-style ``struct`` holding data members only."""

    name: str
    fields: list[FieldDecl] = field(default_factory=list)
    is_forward: bool = False


@dataclass
class TypedefDecl(Decl):
    name: str
    type: TypeRef


@dataclass
class OpaqueRegion(Decl):
    """A verbatim slice of input the parser could not or would not consume."""

    reason: str  # syntax-error | unsupported-construct | preprocessor-conditional
    detail: str = ""

    @property
    def span(self) -> tuple[int, int]:
        return (self.loc.line, self.loc.end_line)


Item = Union[GlobalVarDecl, FunctionDecl, ClassDecl, RecordDecl, TypedefDecl, OpaqueRegion]


@dataclass
class Directive:
    kind: str  # include | define | undef | pragma | using | guard | other
    text: str
    loc: Loc
    target: str = ""
    system: bool = False


@dataclass
class TranslationUnit:
    name: str
    items: list = field(default_factory=list)
    directives: list[Directive] = field(default_factory=list)
    guard: Optional[str] = None
    files: list[str] = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    @property
    def opaque_regions(self) -> list[OpaqueRegion]:
        return [i for i in self.items if isinstance(i, OpaqueRegion)]


# ------------------------------------------------------------- walking


def iter_exprs(node) -> "list[Expr]":
    """Direct child expressions of an expression node."""
    if isinstance(node, (Literal, Name, This)):
        return []
    if isinstance(node, Unary):
        return [node.operand]
    if isinstance(node, (Binary, Comma)):
        return [node.left, node.right]
    if isinstance(node, Assign):
        return [node.target, node.value]
    if isinstance(node, Ternary):
        return [node.cond, node.then, node.other]
    if isinstance(node, Call):
        return [node.func, *node.args]
    if isinstance(node, Index):
        return [node.base, node.index]
    if isinstance(node, Member):
        return [node.base]
    if isinstance(node, Cast):
        return [node.expr]
    if isinstance(node, SizeOf):
        return [node.expr] if node.expr is not None else []
    if isinstance(node, HeapAlloc):
        out = list(node.args or [])
        if node.count is not None:
            out.append(node.count)
        return out
    if isinstance(node, Delete):
        return [node.expr]
    if isinstance(node, InitList):
        return list(node.items)
    return []


def walk_expr(e: Expr):
    yield e
    for c in iter_exprs(e):
        yield from walk_expr(c)


def child_stmts(s: Stmt) -> list[Stmt]:
    if isinstance(s, CompoundStmt):
        return list(s.body)
    if isinstance(s, IfStmt):
        return [s.then] + ([s.other] if s.other is not None else [])
    if isinstance(s, (WhileStmt, DoWhileStmt, RangeForStmt)):
        return [s.body]
    if isinstance(s, ForStmt):
        return ([s.init] if s.init is not None else []) + [s.body]
    if isinstance(s, SwitchStmt):
        return [s.body]
    return []


def stmt_exprs(s: Stmt) -> list[Expr]:
    """Expressions owned directly by a statement (not by nested statements)."""
    if isinstance(s, ExprStmt):
        return [s.expr]
    if isinstance(s, DeclStmt):
        out = []
        for d in s.decls:
            if d.init is not None:
                out.append(d.init)
            out.extend(d.ctor_args or [])
            if d.type.array_extent is not None:
                out.append(d.type.array_extent)
        return out
    if isinstance(s, (IfStmt, WhileStmt, DoWhileStmt, SwitchStmt)):
        return [s.cond]
    if isinstance(s, ForStmt):
        return [e for e in (s.cond, s.step) if e is not None]
    if isinstance(s, RangeForStmt):
        return [s.iterable]
    if isinstance(s, ReturnStmt):
        return [s.value] if s.value is not None else []
    if isinstance(s, CaseStmt):
        return [s.value] if s.value is not None else []
    return []


def walk_stmt(s: Stmt):
    yield s
    for c in child_stmts(s):
        yield from walk_stmt(c)


def all_exprs(s: Stmt):
    """Every expression node reachable from a statement, nested ones included."""
    for st in walk_stmt(s):
        for e in stmt_exprs(st):
            yield from walk_expr(e)
