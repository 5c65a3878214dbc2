"""Statement lowering rules.

Every statement visited gets exactly one ledger entry. A failing rule
discards whatever its children recorded and leaves a single unconverted
entry, so the fence it produces covers the whole statement.
"""

from __future__ import annotations

from dataclasses import fields as dc_fields, is_dataclass, replace
from typing import Optional

from ..frontend import ast as A
from ..target import model as T
from . import analysis as AN
from . import stdlib as S
from .ledger import Unconvertible, converted, unconverted
from .symbols import P_AS, P_ATOM, P_UNARY, R, Sym, paren, rust_ident
from .types import I32, STR, USIZE, RType, scalar, zero_value

_GETCHAR = "let _ = std::io::Read::read(&mut std::io::stdin(), &mut [0u8; 1])"
_LOOPS = (A.WhileStmt, A.DoWhileStmt, A.ForStmt, A.RangeForStmt)


def replace_expr(e, target, new):
    """Copy of ``e`` with the node ``target`` (by identity) swapped for ``new``."""
    if e is target:
        return new
    if not is_dataclass(e) or isinstance(e, A.TypeRef):
        return e
    changes = {}
    for f in dc_fields(e):
        v = getattr(e, f.name)
        if isinstance(v, A.Expr):
            nv = replace_expr(v, target, new)
            if nv is not v:
                changes[f.name] = nv
        elif isinstance(v, list) and v and isinstance(v[0], A.Expr):
            nv = [replace_expr(x, target, new) for x in v]
            if any(a is not b for a, b in zip(nv, v)):
                changes[f.name] = nv
    return replace(e, **changes) if changes else e


def eager_prefix_increments(e: A.Expr) -> list[A.Unary]:
    """Prefix ``++``/``--`` nodes evaluated on every evaluation of ``e``."""
    out = []
    if isinstance(e, A.Unary) and e.op in ("++", "--") and not e.postfix:
        out.append(e)
    if isinstance(e, A.Binary) and e.op in ("&&", "||"):
        return out + eager_prefix_increments(e.left)
    if isinstance(e, A.Ternary):
        return out + eager_prefix_increments(e.cond)
    for c in A.iter_exprs(e):
        out += eager_prefix_increments(c)
    return out


class _LoopCtx:
    def __init__(self, kind: str, brk: Optional[str] = None, cont: Optional[str] = None, via_break: bool = False):
        self.kind = kind  # loop | switch
        self.brk = brk
        self.cont = cont
        self.cont_is_break = via_break  # continue lowered as a break out of the body block


class StmtLowering:
    """Lowering for statements; mixed into the engine."""

    # ------------------------------------------------------ bookkeeping

    def lower_stmt(self, s: A.Stmt, final: bool = False, prev: Optional[A.Stmt] = None) -> list:
        """Lower one statement and record its ledger entry."""
        mark = len(self.ledger)
        cid = self.cid("stmt", s.loc)
        saved = (len(self.scopes), len(self.loops), dict(self.guarded), self.in_unsafe)
        outer_loc, self.cur_loc = self.cur_loc, s.loc
        try:
            out, rule = self._stmt(s, final, prev)
        except Unconvertible as u:
            del self.ledger[mark:]
            del self.scopes[saved[0]:]
            del self.loops[saved[1]:]
            self.guarded, self.in_unsafe = saved[2], saved[3]
            self.ledger.append(unconverted(cid, type(s).__name__, u.reason, s.loc, u.detail))
            return [T.UnconvertedStmt(u.reason, s.text or type(s).__name__, comments=list(s.comments),
                                      trailing=s.trailing_comment)]
        finally:
            self.cur_loc = outer_loc
        if rule is not None:
            self.ledger.insert(mark, converted(cid, rule, s.loc))
        if out:
            out[0].comments = list(s.comments) + out[0].comments
            if s.trailing_comment and out[-1].trailing is None:
                out[-1].trailing = s.trailing_comment
        elif s.comments and rule is not None:
            self.pending_comments += list(s.comments)
        return out

    def block(self, s: Optional[A.Stmt], final: bool = False) -> list:
        if s is None:
            return []
        stmts = s.body if isinstance(s, A.CompoundStmt) else [s]
        return self.block_list(stmts, final)

    def block_list(self, stmts: list, final: bool = False, first_prev: Optional[A.Stmt] = None) -> list:
        stmts = AN.sink_transfers(list(stmts), self.owned_locals(stmts))
        out: list = []
        self.scopes.append({})
        try:
            for i, st in enumerate(stmts):
                self.rest.append(stmts[i + 1:])
                try:
                    prev = stmts[i - 1] if i else first_prev
                    lowered = self.lower_stmt(st, final and i == len(stmts) - 1, prev)
                finally:
                    self.rest.pop()
                if lowered and self.pending_comments:
                    lowered[0].comments = self.pending_comments + lowered[0].comments
                    self.pending_comments = []
                out += lowered
        finally:
            self.scopes.pop()
        return out

    def owned_locals(self, stmts: list) -> set[str]:
        owned = set()
        for st in stmts:
            if isinstance(st, A.DeclStmt):
                for d in st.decls:
                    if d.type.pointer_depth == 1 and not d.type.is_array:
                        hints = AN.pointer_usage(d.name, self.fn_body, d.init, self.heap_call)
                        if "heap" in hints and not hints & {"borrow", "alias", "array-owner"}:
                            owned.add(d.name)
        return owned

    def rest_mentions(self, name: str) -> bool:
        for rest in self.rest:
            if any(AN.mentions(st, name) for st in rest):
                return True
        return False

    def declare(self, name: str, rtype: RType, kind: str = "local", ctype=None) -> Sym:
        sym = Sym(name, rust_ident(name), rtype, kind, ctype, loop_depth=self.loop_depth())
        self.scopes[-1][name] = sym
        return sym

    def loop_depth(self) -> int:
        return sum(1 for c in self.loops if c.kind == "loop")

    def fresh_label(self, kind: str) -> str:
        self.label_counter += 1
        return f"'{kind}{self.label_counter}"

    def check_move(self, value: A.Expr, r: R):
        """Reject moves the C aliasing would not survive."""
        t = r.ty
        owned = t.kind == "box" or (t.kind == "option" and t.inner.kind == "box")
        if not owned:
            return
        if isinstance(value, (A.HeapAlloc, A.Call)) or AN.is_null(value):
            return
        if isinstance(value, A.Name):
            sym = self.lookup(value.name)
            if sym is None or sym.kind != "local":
                raise Unconvertible("aliasing-unknown", f"move out of {value.name}")
            if self.rest_mentions(value.name):
                raise Unconvertible("aliasing-unknown", f"{value.name} used after its ownership moved")
            if self.loop_depth() > sym.loop_depth:
                raise Unconvertible("aliasing-unknown", f"{value.name} moved inside a loop")
            return
        raise Unconvertible("aliasing-unknown", "pointer copied out of a structure")

    # -------------------------------------------------------- dispatch

    def _stmt(self, s: A.Stmt, final: bool, prev: Optional[A.Stmt]):
        if isinstance(s, A.CompoundStmt):
            return [T.Block(self.block(s))], None
        if isinstance(s, A.DeclStmt):
            return [self.lower_local(d) for d in s.decls], "local-declaration"
        if isinstance(s, A.ExprStmt):
            return self.expr_stmt(s.expr, prev)
        if isinstance(s, A.IfStmt):
            return self._if(s)
        if isinstance(s, A.WhileStmt):
            return self._while(s)
        if isinstance(s, A.DoWhileStmt):
            return self._do_while(s)
        if isinstance(s, A.ForStmt):
            return self._for(s)
        if isinstance(s, A.RangeForStmt):
            return self._range_for(s)
        if isinstance(s, A.ReturnStmt):
            return self._return(s, final)
        if isinstance(s, A.BreakStmt):
            ctx = self.loops[-1] if self.loops else None
            if ctx is None:
                raise Unconvertible("break-outside-loop")
            if ctx.kind == "switch" and ctx.brk is None:
                raise Unconvertible("switch-break", "break before the end of a case")
            return [T.Break(ctx.brk)], "break"
        if isinstance(s, A.ContinueStmt):
            ctx = next((c for c in reversed(self.loops) if c.kind == "loop"), None)
            if ctx is None:
                raise Unconvertible("continue-outside-loop")
            if ctx.cont_is_break:
                return [T.Break(ctx.cont)], "continue"
            return [T.Continue(ctx.cont)], "continue"
        if isinstance(s, A.SwitchStmt):
            return self._switch(s)
        if isinstance(s, (A.GotoStmt, A.LabelStmt)):
            raise Unconvertible("goto")
        if isinstance(s, A.CaseStmt):
            raise Unconvertible("switch", "case label outside a switch")
        if isinstance(s, A.EmptyStmt):
            return [], "empty-statement"
        if isinstance(s, A.OpaqueStmt):
            raise Unconvertible(s.detail or s.reason, s.reason)
        raise Unconvertible("unknown-statement", type(s).__name__)

    # ---------------------------------------------------- declarations

    def lower_local(self, d: A.VarDecl) -> T.Let:
        if d.is_static:
            raise Unconvertible("static-local", d.name)
        t = d.type
        extent = None
        if t.array_extent is not None:
            ext = self.ex(t.array_extent)
            if ext.lit != "int" and not (ext.place and self._is_const_name(t.array_extent)):
                raise Unconvertible("variable-length-array", d.name)
            extent = ext.code
        elif t.unsized_array:
            if isinstance(d.init, A.InitList):
                extent = str(len(d.init.items))
            else:
                raise Unconvertible("char-array" if t.base == "char" else "unsized-array", d.name)
        hints = frozenset()
        if t.is_pointer:
            hints = frozenset(AN.pointer_usage(d.name, self.fn_body, d.init, self.heap_call))
        auto = d.is_auto or t.base == "auto"
        value: Optional[R] = None
        if auto:
            if d.init is None or t.is_pointer or t.is_reference:
                raise Unconvertible("auto-declaration", d.name)
            value = self.ex(d.init)
            rt = value.ty
            if rt.kind in ("null", "unit"):
                raise Unconvertible("auto-declaration", d.name)
            if rt.kind == "ref" and rt.inner.kind == "scalar":
                value = self.value(value)
                rt = value.ty
            value = self.coerce(value, rt)
            if value.lit in ("int", "float") and rt.kind == "scalar":
                pass
            self.check_move(d.init, value)
        else:
            rt = self.lower_type(t, "local", hints=hints, extent=extent)
            if d.ctor_args is not None:
                value = self._ctor_init(rt, d)
            elif d.init is not None:
                value = self.coerce(self.ex(d.init, want=rt), rt)
                self.check_move(d.init, value)
            elif rt.kind == "record":
                value = R(self.records[rt.name].default_value(self.records), rt)
            elif rt.kind == "ref":
                raise Unconvertible("uninitialized-reference", d.name)
            else:
                value = R(zero_value(rt, self.records), rt)
        mutable = d.name in self.fn_mut and rt.kind not in ("ref", "str", "slice")
        if rt.kind == "ref" and d.name in self.fn_reassigned:
            raise Unconvertible("rebound-reference", d.name)
        sym = self.declare(d.name, rt, "local", t)
        return T.Let(sym.rname, rt.render(), value.code, mutable)

    def _is_const_name(self, e: A.Expr) -> bool:
        if isinstance(e, A.Name):
            sym = self.lookup(e.name)
            return sym is not None and sym.storage == "const"
        return False

    def _ctor_init(self, rt: RType, d: A.VarDecl) -> R:
        args = d.ctor_args or []
        if rt.kind == "record":
            return self.construct(self.records[rt.name], args)
        if rt.kind == "vec" and 1 <= len(args) <= 2:
            n = self.coerce(self.ex(args[0]), USIZE)
            fill = self.coerce(self.ex(args[1]), rt.inner).code if len(args) == 2 else zero_value(rt.inner, self.records)
            return R(f"vec![{fill}; {n.code}]", rt)
        if rt.kind == "string" and len(args) == 1:
            return self.coerce(self.ex(args[0]), rt)
        if rt.kind == "scalar" and len(args) == 1:
            return self.coerce(self.ex(args[0]), rt)
        if not args:
            return R(zero_value(rt, self.records), rt)
        raise Unconvertible("constructor-call", rt.render())

    # ------------------------------------------------------ expressions

    def expr_stmt(self, e: A.Expr, prev: Optional[A.Stmt] = None):
        if isinstance(e, A.Assign):
            return self.assign(e), "assignment"
        if isinstance(e, A.Unary) and e.op in ("++", "--"):
            step = A.Assign("+=" if e.op == "++" else "-=", e.operand, A.Literal("int", "1"))
            return self.assign(step), "increment"
        if isinstance(e, A.Comma):
            a, _ = self.expr_stmt(e.left, prev)
            b, _ = self.expr_stmt(e.right)
            return a + b, "comma-split"
        if isinstance(e, A.Delete):
            self.note("info", "delete-elided", "explicit delete removed; ownership frees the storage")
            return [], "delete-elided"
        printed = self.print_stmt(e)
        if printed is not None:
            return printed, "print"
        if isinstance(e, A.Call) and isinstance(e.func, A.Name) and not e.func.qualifier:
            name = e.func.name
            if name not in self.funcs and not self._is_method(name):
                if name == "memset":
                    if self.fusable_memset(e, prev):
                        self.note("info", "alloc-fusion", "memset folded into the zeroed allocation")
                        return [], "alloc-fusion"
                    fill = self.memset_fill(e)
                    if fill is not None:
                        return [T.ExprStmt(fill)], "memset-fill"
                    raise Unconvertible("memset", "not a zero fill of whole elements")
                if name == "free" and len(e.args) == 1:
                    self.note("info", "delete-elided", "free removed; ownership frees the storage")
                    return [], "delete-elided"
                if name == "getchar" and not e.args:
                    return [T.ExprStmt(_GETCHAR)], "getchar"
        if isinstance(e, A.Call) and isinstance(e.func, A.Name) and e.func.full in ("std::swap", "swap") \
                and len(e.args) == 2 and "swap" not in self.funcs:
            a = self.ex(e.args[0], write=True)
            b = self.ex(e.args[1], write=True)
            if not (a.place and b.place):
                raise Unconvertible("swap", "operands are not places")
            return [T.ExprStmt(f"std::mem::swap(&mut {paren(a, P_UNARY)}, &mut {paren(b, P_UNARY)})")], "swap"
        r = self.ex(e)
        if isinstance(e, A.Call):
            return [T.ExprStmt(r.code)], "call"
        return [T.ExprStmt(f"let _ = {r.code}")], "expression"

    def _is_method(self, name: str) -> bool:
        return self.cls is not None and self.cls.find_methods(name, self.records) is not None

    def _global_target(self, target: A.Expr) -> Optional[Sym]:
        root = target
        if isinstance(root, A.Index):
            root = root.base
        if isinstance(root, A.Name) and not root.qualifier:
            sym = self.lookup(root.name)
            if sym is not None and sym.kind == "global" and sym.storage in ("lock", "unsafe"):
                return sym
        return None

    def assign(self, e: A.Assign) -> list:
        sym = self._global_target(e.target)
        if sym is not None and sym.storage == "lock":
            return [self._locked_write(sym, e)]
        if sym is not None and sym.storage == "unsafe":
            self.in_unsafe = True
            self.unsafe_used = True
            try:
                inner = self._plain_assign(e)
            finally:
                self.in_unsafe = False
            return [T.UnsafeBlock(inner)]
        return self._plain_assign(e)

    def _plain_assign(self, e: A.Assign) -> list:
        lhs = self.ex(e.target, write=True)
        if not lhs.place:
            raise Unconvertible("not-assignable", type(e.target).__name__)
        t = lhs.ty
        code = lhs.code
        if t.kind == "ref" and isinstance(e.target, A.Name):
            code, t = "*" + paren(lhs, P_UNARY), t.inner
            if not lhs.ty.mutable:
                raise Unconvertible("const-write", e.target.name)
        if e.op == "=":
            v = self.coerce(self.ex(e.value, want=t), t)
            if isinstance(e.value, A.Name) and isinstance(e.target, A.Name) and e.value.name == e.target.name:
                return []
            self.check_move(e.value, v)
            return [T.ExprStmt(f"{code} = {v.code}")]
        return [T.ExprStmt(self._compound(code, t, e.op, e.value))]

    def _compound(self, code: str, t: RType, op: str, value: A.Expr) -> str:
        v = self.value(self.ex(value))
        if t.kind == "string" and op == "+=":
            if v.ty.kind in ("str", "string") or (v.ty.kind == "ref" and v.ty.inner.kind == "string"):
                s = self.coerce(v, STR)
                return f"{code}.push_str({s.code})"
            if v.ty.is_int:
                return f"{code}.push({paren(self.cast_scalar(v, scalar('u8')), P_AS)} as char)"
        if t.kind != "scalar" or t.is_bool and op not in ("&=", "|=", "^="):
            raise Unconvertible("pointer-arithmetic" if t.is_pointerlike else "compound-assignment", op)
        if not (v.ty.is_numeric or v.ty.is_bool):
            raise Unconvertible("compound-assignment", v.ty.render())
        if op in ("<<=", ">>="):
            if v.lit == "int":
                v = self.cast_scalar(v, scalar("u32"))
            elif not v.ty.is_int:
                raise Unconvertible("compound-assignment", op)
            return f"{code} {op} {v.code}"
        if t.is_int and v.ty.is_float:
            bop = op[:-1]
            return f"{code} = ({code} as {v.ty.name} {bop} {paren(v, P_AS + 1)}) as {t.name}"
        if t.is_bool:
            v = self.cast_scalar(v, t)
        else:
            v = self.cast_scalar(v, t)
        return f"{code} {op} {v.code}"

    def _locked_write(self, sym: Sym, e: A.Assign) -> T.LockedStmt:
        place = ""
        elem = sym.rtype
        if isinstance(e.target, A.Index):
            if AN.contains_call(e.target.index):
                raise Unconvertible("global-write", "index with side effects")
            if elem.kind not in ("array", "vec"):
                raise Unconvertible("global-write", sym.name)
            elem = elem.inner
        elif not isinstance(e.target, A.Name):
            raise Unconvertible("global-write", sym.name)
        staged = AN.contains_call(e.value)
        saved = dict(self.guarded)
        if not staged:
            self.guarded[sym.name] = f"{sym.rname}_guard"
        try:
            if isinstance(e.target, A.Index):
                self.guarded[sym.name] = f"{sym.rname}_guard"
                place = f"[{self.index_code(e.target.index)}]"
                if staged:
                    self.guarded = {k: v for k, v in self.guarded.items() if k != sym.name}
            if e.op == "=":
                v = self.coerce(self.ex(e.value, want=elem), elem)
                return T.LockedStmt(sym.rname, "=", v.code, place, staged)
            text = self._compound("$", elem, e.op, e.value)
            if not text.startswith("$ "):
                raise Unconvertible("global-write", e.op)
            op, _, val = text[2:].partition(" ")
            return T.LockedStmt(sym.rname, op, val, place, staged)
        finally:
            self.guarded = saved

    # -------------------------------------------------------- printing

    def print_stmt(self, e: A.Expr) -> Optional[list]:
        if isinstance(e, A.Binary) and e.op == "<<":
            chain = self._stream_chain(e)
            if chain is not None:
                return [T.ExprStmt(self._stream_print(*chain))]
            return None
        if not (isinstance(e, A.Call) and isinstance(e.func, A.Name)):
            return None
        name = e.func.full
        if name.startswith("std::"):
            name = name[5:]
        if name not in S.PRINT_CALLS or name in self.funcs:
            return None
        args = e.args
        if name == "printf":
            if not args:
                raise Unconvertible("format-arity", "printf without a format")
            return [T.ExprStmt(self._printf("stdout", args[0], args[1:]))]
        if name == "fprintf":
            if len(args) < 2:
                raise Unconvertible("format-arity", "fprintf without a format")
            return [T.ExprStmt(self._printf(self._stream_of(args[0]), args[1], args[2:]))]
        if name == "puts" and len(args) == 1:
            s = self._string_arg(args[0])
            return [T.ExprStmt(s if s.startswith("println!") else f'println!("{{}}", {s})')]
        if name == "fputs" and len(args) == 2:
            stream = self._stream_of(args[1])
            s = self._string_arg(args[0], line=False, stream=stream)
            macro = "eprint!" if stream == "stderr" else "print!"
            return [T.ExprStmt(s if s.startswith(("print!", "eprint")) else f'{macro}("{{}}", {s})')]
        if name == "putchar" and len(args) == 1:
            c = self.cast_scalar(self.ex(args[0]), scalar("u8"))
            return [T.ExprStmt(f'print!("{{}}", {paren(c, P_AS)} as char)')]
        if name == "fflush" and len(args) == 1:
            stream = self._stream_of(args[0])
            return [T.ExprStmt(f"std::io::Write::flush(&mut std::io::{stream}()).unwrap()")]
        return None

    def _stream_of(self, e: A.Expr) -> str:
        if isinstance(e, A.Name) and e.name in ("stdout", "stderr"):
            return e.name
        raise Unconvertible("file-io", "stream other than stdout or stderr")

    def _string_arg(self, e: A.Expr, line: bool = True, stream: str = "stdout") -> str:
        if isinstance(e, A.Literal) and e.kind == "string":
            text = S.escape_braces(S.decode_c_string(e.text))
            if line:
                return S.format_call("println!", text, [])
            macro = "eprint!" if stream == "stderr" else "print!"
            return S.format_call(macro, text, [])
        r = self.ex(e)
        if r.ty.kind not in ("str", "string"):
            raise Unconvertible("format-argument", r.ty.render())
        return r.code

    def _printf(self, stream: str, fmt: A.Expr, args: list) -> str:
        if not (isinstance(fmt, A.Literal) and fmt.kind == "string"):
            raise Unconvertible("dynamic-format", "format is not a literal")
        text, fargs = S.translate_printf(S.decode_c_string(fmt.text))
        if len(fargs) != len(args):
            raise Unconvertible("format-arity", f"{len(fargs)} placeholders, {len(args)} arguments")
        macro, text = S.print_macro(text, stream)
        codes = [self._format_arg(fa, self.ex(a)) for fa, a in zip(fargs, args)]
        return S.format_call(macro, text, codes)

    def _format_arg(self, fa: S.FormatArg, x: R) -> str:
        x = self.value(x)
        t = x.ty
        c = fa.conversion
        if c in "dux":
            if not (t.is_int or t.is_bool):
                raise Unconvertible("format-argument", f"%{c} with {t.render()}")
            return self.cast_scalar(x, scalar(fa.target)).code
        if c == "c":
            if not t.is_int:
                raise Unconvertible("format-argument", f"%c with {t.render()}")
            u = self.cast_scalar(x, scalar("u8"))
            return f"{paren(u, P_AS)} as char"
        if c == "s":
            if t.kind in ("str", "string") or (t.kind == "ref" and t.inner.kind == "string"):
                return x.code
            raise Unconvertible("format-argument", f"%s with {t.render()}")
        if c == "f":
            if not t.is_float:
                raise Unconvertible("format-argument", f"%f with {t.render()}")
            return self.cast_scalar(x, scalar("f64")).code
        raise Unconvertible("format-argument", c)

    def _stream_chain(self, e: A.Expr):
        ops = []
        while isinstance(e, A.Binary) and e.op == "<<":
            ops.append(e.right)
            e = e.left
        if isinstance(e, A.Name) and e.full in S.STREAM_NAMES:
            return S.STREAM_NAMES[e.full], list(reversed(ops))
        return None

    def _stream_print(self, stream: str, ops: list) -> str:
        text = []
        args = []
        for o in ops:
            if isinstance(o, A.Literal) and o.kind == "string":
                text.append(S.escape_braces(S.decode_c_string(o.text)))
            elif isinstance(o, A.Literal) and o.kind == "char":
                text.append(S.escape_braces(chr(S.decode_c_char(o.text))))
            elif isinstance(o, A.Name) and o.full in S.ENDL_NAMES:
                text.append("\n")
            else:
                x = self.value(self.ex(o))
                ph, suffix = S.stream_placeholder(x.ty)
                text.append(ph)
                args.append(f"{paren(x, P_AS)}{suffix}" if suffix else x.code)
        macro, fmt = S.print_macro("".join(text), stream)
        return S.format_call(macro, fmt, args)

    # ------------------------------------------------- memset fusion

    def fusable_memset(self, call: A.Call, prev) -> bool:
        if isinstance(prev, list):
            return any(self.fusable_memset(call, p) for p in prev)
        found = self._allocation_of(prev)
        if found is None or len(call.args) != 3:
            return False
        target, alloc = found
        return memset_matches(call, target, alloc)

    def memset_fill(self, call: A.Call) -> Optional[str]:
        """``memset(p, 0, n * sizeof p[0])`` over an owned buffer as a slice fill."""
        if len(call.args) != 3:
            return None
        ptr, val, size = call.args
        if not _zero_byte(val) or not (isinstance(size, A.Binary) and size.op == "*"):
            return None
        for count, sz in ((size.left, size.right), (size.right, size.left)):
            if not isinstance(sz, A.SizeOf):
                continue
            e = sz.expr
            if isinstance(e, A.Index) and AN.is_zero_literal(e.index):
                e = e.base
            elif isinstance(e, A.Unary) and e.op == "*":
                e = e.operand
            else:
                continue
            if e != ptr:
                continue
            buf = self.ex(ptr, write=True)
            t = buf.ty.inner if buf.ty.kind == "ref" else buf.ty
            if t.kind not in ("vec", "array", "slice") or t.inner.kind != "scalar":
                return None
            n = self.index_code(count)
            return f"{paren(buf, P_ATOM)}[..{n}].fill({zero_value(t.inner)})"
        return None

    def _allocation_of(self, prev) -> Optional[tuple[str, A.HeapAlloc]]:
        if isinstance(prev, tuple):
            return prev
        if isinstance(prev, A.DeclStmt) and len(prev.decls) == 1:
            d = prev.decls[0]
            if isinstance(d.init, A.HeapAlloc) and d.init.count is not None:
                return d.name, d.init
        if isinstance(prev, A.ExprStmt) and isinstance(prev.expr, A.Assign) and prev.expr.op == "=":
            v = prev.expr.value
            n = _ptr_name(prev.expr.target)
            if isinstance(v, A.HeapAlloc) and v.count is not None and n is not None:
                return n, v
        return None

    # --------------------------------------------------------- control

    def is_debug_guard(self, s: A.IfStmt) -> bool:
        """An ``if`` on names nothing declares, whose body only prints."""
        if s.other is not None:
            return False
        names = AN.names_in(s.cond)
        if not names:
            return False
        for n in names:
            if self.lookup(n) is not None or n in self.funcs or n in self.records:
                return False
            if self.cls is not None and (self.cls.find_field(n, self.records) or self._is_method(n)):
                return False
        for st in A.walk_stmt(s.then):
            if isinstance(st, A.CompoundStmt):
                continue
            if not isinstance(st, A.ExprStmt) or not self._is_print_expr(st.expr):
                return False
        return True

    def _is_print_expr(self, e: A.Expr) -> bool:
        if isinstance(e, A.Binary) and e.op == "<<":
            return self._stream_chain(e) is not None
        return isinstance(e, A.Call) and isinstance(e.func, A.Name) and e.func.name in S.PRINT_CALLS

    def _if(self, s: A.IfStmt):
        if self.is_debug_guard(s):
            self.note("info", "debug-guard-elided", "debug-only diagnostics on an undeclared flag removed", s.loc)
            return [], "debug-guard-elided"
        cond = s.cond
        pre: list = []
        for u in eager_prefix_increments(cond):
            if not isinstance(u.operand, (A.Name, A.Member, A.Index)):
                raise Unconvertible("side-effect-in-condition")
            step = A.Assign("+=" if u.op == "++" else "-=", u.operand, A.Literal("int", "1"))
            pre += self.assign(step)
            cond = replace_expr(cond, u, u.operand)
        c = self.cond(cond)
        then = self.block(s.then)
        other = None
        if s.other is not None:
            other = self.block(s.other)
        return pre + [T.If(c, then, other)], "if"

    def _loop_body(self, body: A.Stmt, ctx: _LoopCtx) -> list:
        self.loops.append(ctx)
        try:
            return self.block(body)
        finally:
            self.loops.pop()

    def _while(self, s: A.WhileStmt):
        if _always_true(s.cond):
            return [T.Loop(self._loop_body(s.body, _LoopCtx("loop")))], "infinite-loop"
        c = self.cond(s.cond)
        return [T.While(c, self._loop_body(s.body, _LoopCtx("loop")))], "while"

    def _do_while(self, s: A.DoWhileStmt):
        needs = AN.has_loop_control(s.body, (A.ContinueStmt,))
        c = self.truthy(self.ex(s.cond))
        neg = f"!{paren(c, P_UNARY)}"
        if needs:
            l, b = self.fresh_label("l"), self.fresh_label("b")
            body = self._loop_body(s.body, _LoopCtx("loop", brk=l, cont=b, via_break=True))
            tail = [] if _always_true(s.cond) else [T.If(neg, [T.Break(l)])]
            return [T.Loop([T.Block(body, label=b)] + tail, label=l)], "do-while"
        body = self._loop_body(s.body, _LoopCtx("loop"))
        tail = [] if _always_true(s.cond) else [T.If(neg, [T.Break()])]
        return [T.Loop(body + tail)], "do-while"

    def _for(self, s: A.ForStmt):
        rng = self._as_range(s)
        if rng is not None:
            return rng, "for-range"
        self.scopes.append({})
        try:
            init = []
            if s.init is not None:
                if isinstance(s.init, A.DeclStmt):
                    init = [self.lower_local(d) for d in s.init.decls]
                elif isinstance(s.init, A.ExprStmt):
                    init, _ = self.expr_stmt(s.init.expr)
                elif not isinstance(s.init, A.EmptyStmt):
                    raise Unconvertible("for-init", type(s.init).__name__)
            c = None if s.cond is None or _always_true(s.cond) else self.cond(s.cond)
            step = []
            if s.step is not None:
                step, _ = self.expr_stmt(s.step)
            needs = s.step is not None and AN.has_loop_control(s.body, (A.ContinueStmt,))
            if needs:
                l, b = self.fresh_label("l"), self.fresh_label("b")
                body = self._loop_body(s.body, _LoopCtx("loop", brk=l, cont=b, via_break=True))
                body = [T.Block(body, label=b)] + step
            else:
                l = None
                body = self._loop_body(s.body, _LoopCtx("loop")) + step
            loop = T.Loop(body, label=l) if c is None else T.While(c, body, label=l)
        finally:
            self.scopes.pop()
        if init:
            return [T.Block(init + [loop])], "for-while"
        return [loop], "for-while"

    def _as_range(self, s: A.ForStmt) -> Optional[list]:
        init, cond, step = s.init, s.cond, s.step
        if not (isinstance(init, A.DeclStmt) and len(init.decls) == 1):
            return None
        d = init.decls[0]
        if d.init is None or d.type.is_pointer or d.type.is_array or d.type.is_reference:
            return None
        try:
            it = self.lower_type(d.type, "local")
        except Unconvertible:
            return None
        if not it.is_int:
            return None
        i = d.name
        if not (isinstance(cond, A.Binary) and cond.op in ("<", "<=")
                and isinstance(cond.left, A.Name) and cond.left.name == i and not cond.left.qualifier):
            return None
        bound = cond.right
        unit_step = (isinstance(step, A.Unary) and step.op == "++" and isinstance(step.operand, A.Name)
                     and step.operand.name == i) or (
            isinstance(step, A.Assign) and step.op == "+=" and isinstance(step.target, A.Name)
            and step.target.name == i and isinstance(step.value, A.Literal) and step.value.text == "1")
        if not unit_step:
            return None
        written = AN.written_roots(s.body)
        if i in written:
            return None
        bnames = AN.names_in(bound)
        if bnames & written or i in bnames:
            return None
        for x in A.walk_expr(bound):
            if isinstance(x, (A.Assign, A.HeapAlloc)) or isinstance(x, A.Unary) and x.op in ("++", "--"):
                return None
            if isinstance(x, A.Call):
                if not (isinstance(x.func, A.Member) and x.func.name in ("size", "length") and not x.args):
                    return None
        body_calls = any(isinstance(x, A.Call) for x in A.all_exprs(s.body))
        if body_calls:
            for n in bnames:
                sym = self.lookup(n)
                if sym is None or sym.kind == "global" and sym.storage in ("lock", "unsafe"):
                    return None
                if self.cls is not None and sym is None:
                    return None
            for x in A.walk_expr(bound):
                if isinstance(x, A.Member) or isinstance(x, A.Call):
                    return None
        start = self.coerce(self.ex(d.init), it)
        end = self.coerce(self.value(self.ex(bound)), it)
        start_code = start.code
        if start.lit == "int" and end.lit == "int" and it.name != "i32":
            start_code = f"{start.code}{it.name}"
        self.scopes.append({})
        try:
            sym = self.declare(i, it, "local", d.type)
            body = self._loop_body(s.body, _LoopCtx("loop"))
        finally:
            self.scopes.pop()
        start_text = start_code if start.prec >= P_AS + 1 or start.lit else f"({start_code})"
        end_text = end.code if end.prec > P_AS else f"({end.code})"
        return [T.ForRange(sym.rname, start_text, end_text, body, inclusive=cond.op == "<=")]

    def _range_for(self, s: A.RangeForStmt):
        v = s.var
        by_ref = v.type.is_reference and not v.type.is_const
        it = self.ex(s.iterable, write=by_ref)
        t = it.ty
        if t.kind == "ref" and t.inner.kind in ("vec", "array", "string"):
            t = t.inner
        name = rust_ident(v.name)
        writes = v.name in AN.written_roots(s.body)
        if t.kind in ("string", "str"):
            if by_ref:
                raise Unconvertible("string-mutation", "mutable iteration over a string")
            el = scalar("u8")
            pattern = f"mut {name}" if writes else name
            iterable, bound = f"{paren(it, P_ATOM)}.bytes()", el
        elif t.kind in ("vec", "array", "slice"):
            el = t.inner
            if by_ref:
                if t.kind == "slice" and not t.mutable:
                    raise Unconvertible("const-write", "mutable iteration over a shared slice")
                pattern, iterable, bound = name, f"{paren(it, P_ATOM)}.iter_mut()", RType("ref", inner=el, mutable=True)
            elif el.is_copy:
                if writes:
                    pattern, iterable, bound = f"mut {name}", f"{paren(it, P_ATOM)}.iter().copied()", el
                else:
                    pattern, iterable, bound = f"&{name}", f"{paren(it, P_ATOM)}.iter()", el
            elif writes:
                if el.kind == "record":
                    self.clone_needed.add(el.name)
                pattern, iterable, bound = f"mut {name}", f"{paren(it, P_ATOM)}.iter().cloned()", el
            else:
                pattern, iterable, bound = name, f"{paren(it, P_ATOM)}.iter()", RType("ref", inner=el, mutable=False)
        else:
            raise Unconvertible("range-for", t.render())
        if v.type.base != "auto" and not v.type.is_pointer:
            declared = self.lower_type(A.TypeRef(v.type.base, args=v.type.args), "local")
            if declared != el:
                raise Unconvertible("range-for", f"element {el.render()} bound as {declared.render()}")
        self.scopes.append({})
        try:
            self.declare(v.name, bound, "local", v.type)
            body = self._loop_body(s.body, _LoopCtx("loop"))
        finally:
            self.scopes.pop()
        return [T.ForEach(pattern, iterable, body)], "range-for"

    def _switch(self, s: A.SwitchStmt):
        scrut = self.value(self.ex(s.cond))
        if not (scrut.ty.is_int or scrut.ty.is_bool):
            raise Unconvertible("switch", scrut.ty.render())
        groups: list[tuple[list, list]] = []
        for st in s.body.body:
            if isinstance(st, A.CaseStmt):
                if groups and not groups[-1][1]:
                    groups[-1][0].append(st.value)
                else:
                    groups.append(([st.value], []))
            elif not groups:
                raise Unconvertible("switch", "statement before the first case")
            else:
                groups[-1][1].append(st)
        groups = [(labels, _flatten_case(body)) for labels, body in groups]
        early = any(
            AN.has_loop_control(x, (A.BreakStmt,))
            for _, body in groups
            for x in (body[:-1] if body and isinstance(body[-1], A.BreakStmt) else body)
        )
        label = None
        if early:
            if any(AN.has_loop_control(x, (A.ContinueStmt,)) for x in s.body.body):
                outer = next((c for c in reversed(self.loops) if c.kind == "loop"), None)
                if outer is None or outer.cont is None:
                    raise Unconvertible("switch-break", "continue next to an early break")
            label = self.fresh_label("s")
        arms: list[T.MatchArm] = []
        default = None
        self.loops.append(_LoopCtx("switch", brk=label))
        try:
            for gi, (labels, body) in enumerate(groups):
                last = gi == len(groups) - 1
                ends = bool(body) and isinstance(body[-1], (A.BreakStmt, A.ReturnStmt, A.ContinueStmt, A.GotoStmt))
                if not ends and not last:
                    raise Unconvertible("switch-fallthrough")
                stmts = body[:-1] if body and isinstance(body[-1], A.BreakStmt) else body
                lowered = self.block_list(stmts)
                pats = []
                is_default = False
                for lab in labels:
                    if lab is None:
                        is_default = True
                        continue
                    pats.append(self._case_pattern(lab, scrut.ty))
                if is_default:
                    default = lowered
                else:
                    arms.append(T.MatchArm(pats, lowered))
        finally:
            self.loops.pop()
        arms.append(T.MatchArm(None, default or []))
        match = T.Match(scrut.code, arms)
        if label is not None:
            return [T.Block([match], label=label)], "switch"
        return [match], "switch"

    def _case_pattern(self, e: A.Expr, t: RType) -> str:
        r = self.ex(e)
        if r.lit in ("int", "char"):
            c = self.cast_scalar(r, t)
            if c.lit or c.prec == P_ATOM:
                return c.code
            if r.ty.is_int and t.is_int:
                v = r.code
                return v
        if r.place and self._is_const_name(e) and r.ty == t:
            return r.code
        raise Unconvertible("switch", "case label is not a literal")

    def _return(self, s: A.ReturnStmt, final: bool):
        if self.is_main:
            if s.value is None or _is_zero(s.value):
                if final:
                    return [], "main-return"
                return [T.ExprStmt("std::process::exit(0)")], "main-return"
            code = self.cast_scalar(self.ex(s.value), I32)
            return [T.ExprStmt(f"std::process::exit({code.code})")], "main-return"
        if self.is_ctor:
            if s.value is not None:
                raise Unconvertible("constructor-return-value")
            return [T.Return(self.self_name)], "return"
        ret = self.fn_ret
        if s.value is None:
            if ret is not None:
                raise Unconvertible("missing-return-value")
            return ([] if final else [T.Return(None)]), "return"
        if ret is None:
            r = self.ex(s.value)
            return [T.ExprStmt(r.code), T.Return(None)], "return"
        r = self.coerce(self.ex(s.value, want=ret), ret)
        self.check_move(s.value, r)
        if final and self.config.return_style == "tail":
            return [T.Tail(r.code)], "tail-return"
        return [T.Return(r.code)], "return"


def _ptr_name(e: A.Expr) -> Optional[str]:
    if isinstance(e, A.Name) and not e.qualifier:
        return e.name
    if isinstance(e, A.Member) and isinstance(e.base, A.This):
        return e.name
    return None


def _is_zero(e: A.Expr) -> bool:
    return isinstance(e, A.Literal) and e.kind == "int" and e.text.rstrip("uUlL") in ("0",)


def _always_true(e: A.Expr) -> bool:
    if isinstance(e, A.Literal):
        if e.kind == "bool":
            return e.text == "true"
        if e.kind == "int":
            return e.text.rstrip("uUlL") not in ("0", "0x0")
    return False


def memset_matches(call: A.Call, target: str, alloc: A.HeapAlloc) -> bool:
    """True when ``call`` zeroes exactly the storage ``alloc`` produced."""
    if len(call.args) != 3 or alloc.count is None:
        return False
    ptr, val, size = call.args
    if _ptr_name(ptr) != target:
        return False
    if not _zero_byte(val):
        return False
    if not (isinstance(size, A.Binary) and size.op == "*"):
        return False
    for count, sz in ((size.left, size.right), (size.right, size.left)):
        if count == alloc.count and isinstance(sz, A.SizeOf) and _sizeof_element(sz, target, alloc):
            return True
    return False


def _flatten_case(body: list) -> list:
    """Splice a trailing braced block into the case body so its final break is visible."""
    while body and isinstance(body[-1], A.CompoundStmt):
        inner = body[-1]
        body = body[:-1] + list(inner.body)
    return body


def _zero_byte(val: A.Expr) -> bool:
    return isinstance(val, A.Literal) and (
        (val.kind == "int" and val.text.rstrip("uUlL") == "0") or (val.kind == "char" and val.text in ("'\\0'", "'\\x00'"))
    )


def _sizeof_element(sz: A.SizeOf, target: str, alloc: A.HeapAlloc) -> bool:
    el = alloc.type
    if sz.type is not None:
        t = sz.type
        return t.base == el.base and t.pointer_depth == el.pointer_depth and not t.is_array and t.args == el.args
    e = sz.expr
    if isinstance(e, A.Index):
        return _ptr_name(e.base) == target
    if isinstance(e, A.Unary) and e.op == "*":
        return _ptr_name(e.operand) == target
    return False
