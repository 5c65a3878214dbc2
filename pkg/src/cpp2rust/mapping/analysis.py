"""Whole-function and whole-unit facts the lowering rules consult."""

from __future__ import annotations

from typing import Callable, Iterable, Optional

from ..frontend import ast as A

MUTATING_METHODS = {
    "push_back", "pop_back", "clear", "insert", "erase", "resize", "assign",
    "append", "swap", "emplace_back", "reserve",
}


def is_null(e: A.Expr) -> bool:
    return isinstance(e, A.Literal) and e.kind == "null" or (
        isinstance(e, A.Cast) and is_null(e.expr)
    )


def is_zero_literal(e: A.Expr) -> bool:
    return isinstance(e, A.Literal) and e.kind == "int" and e.text in ("0", "0L", "0u", "0U")


def lvalue_root(e: A.Expr) -> Optional[A.Expr]:
    """The Name or This at the bottom of an lvalue chain."""
    while True:
        if isinstance(e, (A.Name, A.This)):
            return e
        if isinstance(e, A.Member) and isinstance(e.base, A.This):
            return e
        if isinstance(e, (A.Member, A.Index)):
            e = e.base
        elif isinstance(e, A.Unary) and e.op == "*":
            e = e.operand
        elif isinstance(e, A.Cast):
            e = e.expr
        else:
            return None


def root_name(e: A.Expr) -> Optional[str]:
    r = lvalue_root(e)
    if isinstance(r, A.Name) and not r.qualifier:
        return r.name
    if isinstance(r, A.Member) and isinstance(r.base, A.This):
        return "this." + r.name
    return None


def body_exprs(body: Optional[A.Stmt]) -> list[A.Expr]:
    if body is None:
        return []
    return list(A.all_exprs(body))


def written_targets(body: Optional[A.Stmt]) -> list[A.Expr]:
    """Every lvalue expression assigned or incremented in ``body``."""
    out = []
    for e in body_exprs(body):
        if isinstance(e, A.Assign):
            out.append(e.target)
        elif isinstance(e, A.Unary) and e.op in ("++", "--"):
            out.append(e.operand)
    return out


def written_roots(body: Optional[A.Stmt]) -> set[str]:
    """Names whose storage (or storage reachable from them) is modified."""
    roots = set()
    for t in written_targets(body):
        n = root_name(t)
        if n:
            roots.add(n)
    for e in body_exprs(body):
        if isinstance(e, A.Unary) and e.op == "&":
            n = root_name(e.operand)
            if n:
                roots.add(n)
        elif isinstance(e, A.Call) and isinstance(e.func, A.Member):
            n = root_name(e.func.base)
            if n:
                roots.add(n)
    return roots


def reassigned_names(body: Optional[A.Stmt]) -> set[str]:
    """Names assigned as a whole (not through a member or index)."""
    out = set()
    for t in written_targets(body):
        if isinstance(t, A.Name) and not t.qualifier:
            out.add(t.name)
    return out


def names_in(e) -> set[str]:
    out = set()
    if e is None:
        return out
    for x in A.walk_expr(e):
        if isinstance(x, A.Name) and not x.qualifier:
            out.add(x.name)
    return out


def stmt_names(s: A.Stmt) -> set[str]:
    out = set()
    for e in A.all_exprs(s):
        if isinstance(e, A.Name) and not e.qualifier:
            out.add(e.name)
    for st in A.walk_stmt(s):
        if isinstance(st, A.DeclStmt):
            for d in st.decls:
                out.add(d.name)
                if d.init is not None:
                    out |= names_in(d.init)
    return out


def mentions(s: A.Stmt, name: str) -> bool:
    return name in stmt_names(s)


def declared_names(body: Optional[A.Stmt]) -> set[str]:
    out = set()
    if body is None:
        return out
    for st in A.walk_stmt(body):
        if isinstance(st, A.DeclStmt):
            out.update(d.name for d in st.decls)
        elif isinstance(st, A.RangeForStmt):
            out.add(st.var.name)
    return out


def _bool_context_exprs(body: A.Stmt) -> list[A.Expr]:
    out = []
    for st in A.walk_stmt(body):
        if isinstance(st, (A.IfStmt, A.WhileStmt, A.DoWhileStmt)):
            out.append(st.cond)
        elif isinstance(st, A.ForStmt) and st.cond is not None:
            out.append(st.cond)
    for e in A.all_exprs(body):
        if isinstance(e, A.Binary) and e.op in ("&&", "||"):
            out += [e.left, e.right]
        elif isinstance(e, A.Unary) and e.op == "!":
            out.append(e.operand)
        elif isinstance(e, A.Ternary):
            out.append(e.cond)
    return out


def pointer_usage(
    name: str,
    body: Optional[A.Stmt],
    init: Optional[A.Expr] = None,
    heap_call: Callable[[A.Expr], bool] = lambda e: False,
) -> set[str]:
    """Usage hints for a pointer variable, as consumed by ``lower_type``."""
    hints: set[str] = set()
    sources = [init] if init is not None else []
    if body is not None:
        for e in A.all_exprs(body):
            if isinstance(e, A.Assign) and isinstance(e.target, A.Name) and e.target.name == name:
                hints.add("reassigned")
                if e.op == "=":
                    sources.append(e.value)
                else:
                    hints.add("arith")
            elif isinstance(e, A.Index) and isinstance(e.base, A.Name) and e.base.name == name:
                hints.add("indexed")
            elif isinstance(e, A.Binary) and e.op in ("==", "!="):
                for a, b in ((e.left, e.right), (e.right, e.left)):
                    if isinstance(a, A.Name) and a.name == name and (is_null(b) or is_zero_literal(b)):
                        hints.add("nullable")
            elif isinstance(e, A.Binary) and e.op in ("+", "-"):
                for a in (e.left, e.right):
                    if isinstance(a, A.Name) and a.name == name:
                        hints.add("arith")
            elif isinstance(e, A.Unary) and e.op in ("++", "--") and isinstance(e.operand, A.Name) and e.operand.name == name:
                hints.add("arith")
            elif isinstance(e, A.Delete) and isinstance(e.expr, A.Name) and e.expr.name == name:
                hints.add("freed")
            elif isinstance(e, A.Call) and isinstance(e.func, A.Name) and e.func.name == "free":
                if e.args and isinstance(e.args[0], A.Name) and e.args[0].name == name:
                    hints.add("freed")
        for t in written_targets(body):
            if isinstance(t, A.Name):
                continue
            if root_name(t) == name:
                hints.add("written")
        for e in A.all_exprs(body):
            if isinstance(e, A.Call) and isinstance(e.func, A.Member) and root_name(e.func.base) == name:
                hints.add("written")
        for e in _bool_context_exprs(body):
            if isinstance(e, A.Name) and e.name == name:
                hints.add("nullable")
    for v in sources:
        hints |= _source_kind(v, heap_call)
    return hints


def _source_kind(v: A.Expr, heap_call) -> set[str]:
    if is_null(v):
        return {"nullable"}
    if isinstance(v, A.HeapAlloc):
        return {"array-owner"} if v.count is not None else {"heap"}
    if isinstance(v, A.Unary) and v.op == "&":
        return {"borrow"}
    if isinstance(v, A.Literal) and v.kind == "string":
        return {"string"}
    if isinstance(v, A.Call) and heap_call(v):
        return {"heap"}
    if isinstance(v, A.Ternary):
        return _source_kind(v.then, heap_call) | _source_kind(v.other, heap_call)
    return {"alias"}


def global_writes(bodies: Iterable[tuple[A.Stmt, set[str]]]) -> set[str]:
    """Global names written in any body; each body comes with its local names."""
    out = set()
    for body, local in bodies:
        for n in written_roots(body):
            if n not in local:
                out.add(n)
    return out


def contains_call(e: A.Expr) -> bool:
    return any(isinstance(x, (A.Call, A.HeapAlloc)) for x in A.walk_expr(e))


def has_loop_control(s: A.Stmt, kinds=(A.ContinueStmt,)) -> bool:
    """True if ``s`` holds a control statement that targets the enclosing loop."""
    if isinstance(s, kinds):
        return True
    if isinstance(s, (A.WhileStmt, A.DoWhileStmt, A.ForStmt, A.RangeForStmt)):
        return False
    if isinstance(s, A.SwitchStmt) and kinds == (A.BreakStmt,):
        return False
    return any(has_loop_control(c, kinds) for c in A.child_stmts(s))


# ------------------------------------------------------- ownership moves


def transfer_of(s: A.Stmt, owned: set[str]) -> Optional[tuple[str, str]]:
    """(p, q) when ``s`` is ``p->f = q`` with q an owned pointer local."""
    if not isinstance(s, A.ExprStmt) or not isinstance(s.expr, A.Assign) or s.expr.op != "=":
        return None
    t, v = s.expr.target, s.expr.value
    if not (isinstance(v, A.Name) and v.name in owned):
        return None
    if not isinstance(t, A.Member) or not t.arrow:
        return None
    p = root_name(t)
    if p is None or p == v.name:
        return None
    return p, v.name


def sink_transfers(stmts: list[A.Stmt], owned: set[str]) -> list[A.Stmt]:
    """Move each ``p->f = q`` past the last use of q.

    Links are handled from the last one backwards, and a statement never
    moves across another statement that mentions p, so the reordering only
    swaps writes to disjoint storage.
    """
    order = list(stmts)
    candidates = [s for s in stmts if transfer_of(s, owned)]
    for s in reversed(candidates):
        p, q = transfer_of(s, owned)
        j = next(i for i, x in enumerate(order) if x is s)
        last = None
        for k in range(j + 1, len(order)):
            if mentions(order[k], q):
                last = k
        if last is None:
            continue
        if any(mentions(order[k], p) for k in range(j + 1, last + 1)):
            continue
        order.pop(j)
        order.insert(last, s)
    return order
