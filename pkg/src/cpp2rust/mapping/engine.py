"""Lower a parsed translation unit into the target syntax tree.

``lower_unit`` is the entry point. It returns the target unit and the
conversion ledger, which holds one entry per visited construct: top-level
items, class members and statements.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

from ..diagnostics import Diagnostic
from ..frontend import ast as A
from ..target import model as T
from . import analysis as AN
from .config import LoweringConfig
from .exprs import ExprLowering, literal_value
from .ledger import LedgerEntry, Unconvertible, converted, unconverted
from .overloads import Signature, rename_overloads
from .stmts import StmtLowering
from .symbols import FieldInfo, FnSig, ParamInfo, R, RecordInfo, Sym, rust_ident
from .types import STR, STRING, RType, lower_type as _lower_type, record, zero_value


class Lowerer(ExprLowering, StmtLowering):
    def __init__(self, unit: A.TranslationUnit, config: Optional[LoweringConfig] = None):
        self.unit = unit
        self.config = config or LoweringConfig()
        self.ledger: list[LedgerEntry] = []
        self.notes: list[Diagnostic] = []
        self.records: dict[str, RecordInfo] = {}
        self.funcs: dict[str, list[FnSig]] = {}
        self.sigs: dict[int, FnSig] = {}
        self.globals: dict[str, Sym] = {}
        self.typedefs: dict[str, A.TypeRef] = {}
        self.heap_funcs: set[str] = set()
        self.clone_needed: set[str] = set()
        self.unsafe_used = False
        self._ids: dict[str, int] = {}
        self.cur_loc: Optional[A.Loc] = None
        self._reset_fn()

    def _reset_fn(self):
        self.scopes: list[dict[str, Sym]] = []
        self.loops: list = []
        self.rest: list = []
        self.guarded: dict[str, str] = {}
        self.in_unsafe = False
        self.cls: Optional[RecordInfo] = None
        self.self_name: Optional[str] = None
        self.fn_body: Optional[A.Stmt] = None
        self.fn_ret: Optional[RType] = None
        self.fn_mut: set[str] = set()
        self.fn_reassigned: set[str] = set()
        self.is_main = False
        self.is_ctor = False
        self.label_counter = 0
        self.pending_comments: list[str] = []

    # ------------------------------------------------------- utilities

    def cid(self, kind: str, loc: A.Loc, name: str = "") -> str:
        base = f"{self.unit.name}:{kind}:{name}@{loc.line}:{loc.col}" if name else \
            f"{self.unit.name}:{kind}@{loc.line}:{loc.col}"
        n = self._ids.get(base, 0)
        self._ids[base] = n + 1
        return base if n == 0 else f"{base}#{n}"

    def note(self, severity: str, rule: str, message: str, loc: Optional[A.Loc] = None):
        loc = loc or self.cur_loc
        file = loc.file if loc is not None and loc.file != "<none>" else self.unit.name
        self.notes.append(Diagnostic(severity, rule, file, loc.line if loc else 0, message))

    def lookup(self, name: str) -> Optional[Sym]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return self.globals.get(name)

    def heap_call(self, e: A.Expr) -> bool:
        return isinstance(e, A.Call) and isinstance(e.func, A.Name) and e.func.name in self.heap_funcs

    def record_type(self, name: str) -> RType:
        return record(name)

    def resolve_typedef(self, t: A.TypeRef) -> A.TypeRef:
        seen = set()
        while t.base in self.typedefs and t.base not in seen:
            seen.add(t.base)
            td = self.typedefs[t.base]
            t = replace(
                t, base=td.base, pointer_depth=t.pointer_depth + td.pointer_depth,
                is_reference=t.is_reference or td.is_reference, is_const=t.is_const or td.is_const,
                array_extent=t.array_extent if t.array_extent is not None else td.array_extent,
                unsized_array=t.unsized_array or td.unsized_array, args=td.args or t.args,
            )
        return t

    def lower_type(self, t: A.TypeRef, position: str, hints=frozenset(), extent=None, owner=None) -> RType:
        t = self.resolve_typedef(t)
        if t.is_array and extent is None and t.array_extent is not None:
            ext = t.array_extent
            if isinstance(ext, A.Literal) and ext.kind == "int":
                extent = str(literal_value(self.ex(ext).code))
            elif isinstance(ext, A.Name) and ext.name in self.globals and self.globals[ext.name].storage == "const":
                extent = self.globals[ext.name].rname + " as usize"
        return _lower_type(t, position, owner=owner, records=frozenset(self.records),
                           hints=frozenset(hints), extent=extent)

    # --------------------------------------------------------- passes

    def run(self) -> tuple[T.TargetUnit, list[LedgerEntry]]:
        items = self.unit.items
        for it in items:
            if isinstance(it, A.TypedefDecl):
                self.typedefs[it.name] = it.type
        for it in items:
            if isinstance(it, (A.ClassDecl, A.RecordDecl)) and not it.is_forward:
                base = it.bases[0] if isinstance(it, A.ClassDecl) and it.bases else None
                self.records[it.name] = RecordInfo(it.name, isinstance(it, A.ClassDecl), it, base=base)
        self._collect_heap_funcs()
        field_hints = self._field_hints()
        for rec in self.records.values():
            self._record_fields(rec, field_hints)
        self._collect_signatures()
        self._name_overloads()
        for rec in self.records.values():
            self._receivers(rec)
        self._collect_globals()
        out: list = []
        for it in items:
            out += self.lower_item(it)
        self._apply_derives(out)
        tu = T.TargetUnit(self.unit.name, out, notes=list(self.unit.diagnostics) + self.notes)
        return tu, self.ledger

    def _all_functions(self):
        for it in self.unit.items:
            if isinstance(it, A.FunctionDecl):
                yield None, it
            elif isinstance(it, A.ClassDecl) and not it.is_forward:
                for m in it.functions:
                    yield it, m

    def _collect_heap_funcs(self):
        for _, fn in self._all_functions():
            if fn.body is None or fn.return_type is None or fn.return_type.pointer_depth != 1:
                continue
            heap = False
            ok = True
            for st in A.walk_stmt(fn.body):
                if isinstance(st, A.ReturnStmt) and st.value is not None:
                    v = st.value
                    if isinstance(v, A.HeapAlloc) and v.count is None:
                        heap = True
                    elif AN.is_null(v):
                        continue
                    elif isinstance(v, A.Name):
                        hints = AN.pointer_usage(v.name, fn.body, self._init_of(fn.body, v.name))
                        if "heap" in hints and not hints & {"borrow", "alias", "array-owner"}:
                            heap = True
                        else:
                            ok = False
                    else:
                        ok = False
            if heap and ok:
                self.heap_funcs.add(fn.name)

    @staticmethod
    def _init_of(body, name):
        for st in A.walk_stmt(body):
            if isinstance(st, A.DeclStmt):
                for d in st.decls:
                    if d.name == name:
                        return d.init
        return None

    def _field_hints(self) -> dict[str, set[str]]:
        hints: dict[str, set[str]] = {}

        def add(name, v):
            if isinstance(v, A.HeapAlloc):
                hints.setdefault(name, set()).add("array-owner" if v.count is not None else "heap")
            elif self.heap_call(v):
                hints.setdefault(name, set()).add("heap")

        for _, fn in self._all_functions():
            for name, args in fn.init_list:
                if len(args) == 1:
                    add(name, args[0])
            if fn.body is None:
                continue
            for e in A.all_exprs(fn.body):
                if isinstance(e, A.Assign) and e.op == "=":
                    t = e.target
                    if isinstance(t, A.Member):
                        add(t.name, e.value)
                    elif isinstance(t, A.Name) and fn.kind != "function":
                        add(t.name, e.value)
        return hints

    def _record_fields(self, rec: RecordInfo, field_hints):
        decl = rec.decl
        fields = decl.fields if isinstance(decl, A.ClassDecl) else decl.fields
        for f in fields:
            try:
                if f.type.is_reference:
                    raise Unconvertible("reference-field", f.name)
                rt = self.lower_type(f.type, "field", hints=field_hints.get(f.name, set()), owner=rec.name)
                if rt.kind == "str":
                    rt = STRING
                err = None
            except Unconvertible as u:
                rt, err = None, u
            public = f.access == "public" and (not rec.is_class or True)
            rec.fields[f.name] = FieldInfo(f.name, rust_ident(f.name), f.type, rt, public, err, f)

    def _param_info(self, fn: A.FunctionDecl, cls_name: Optional[str]) -> tuple[list[ParamInfo], Optional[Unconvertible]]:
        out = []
        err = None
        body = fn.body
        reassigned = AN.reassigned_names(body)
        written = AN.written_roots(body)
        for i, p in enumerate(fn.params):
            name = p.name or f"_arg{i}"
            rt = None
            try:
                hints = AN.pointer_usage(name, body) if p.type.is_pointer else set()
                if body is None and p.type.is_pointer:
                    hints = set()
                rt = self.lower_type(p.type, "parameter", hints=hints)
                if rt.kind == "unit":
                    raise Unconvertible("void-value", name)
            except Unconvertible as u:
                err = err or u
            mutable = rt is not None and (
                name in reassigned or (name in written and rt.kind not in ("ref", "slice", "option", "str"))
            )
            out.append(ParamInfo(name, rust_ident(name), p.type, rt, p.default, mutable))
        return out, err

    def _make_sig(self, fn: A.FunctionDecl, scope: str) -> FnSig:
        params, err = self._param_info(fn, scope or None)
        ret = None
        if fn.kind in ("constructor", "destructor"):
            ret = record(scope) if fn.kind == "constructor" else None
        elif fn.return_type is not None and not (fn.name == "main" and not scope):
            try:
                hints = set()
                if fn.return_type.is_pointer and fn.name in self.heap_funcs:
                    hints = {"heap"}
                    if fn.body is not None and any(
                        isinstance(st, A.ReturnStmt) and st.value is not None and AN.is_null(st.value)
                        for st in A.walk_stmt(fn.body)
                    ):
                        hints.add("nullable")
                rt = self.lower_type(fn.return_type, "return", hints=hints)
                ret = None if rt.kind == "unit" else rt
            except Unconvertible as u:
                err = err or u
        if fn.name == "main" and not scope and fn.params:
            err = None
        return FnSig(fn, scope, params=params, ret=ret, error=err, is_static=fn.is_static)

    def _collect_signatures(self):
        defined = {it.name for it in self.unit.items if isinstance(it, A.FunctionDecl) and it.body is not None}
        for it in self.unit.items:
            if isinstance(it, A.FunctionDecl) and not it.qualifier:
                if it.body is None and it.name in defined:
                    continue
                sig = self._make_sig(it, "")
                self.sigs[id(it)] = sig
                self.funcs.setdefault(it.name, []).append(sig)
        for it in self.unit.items:
            if isinstance(it, A.ClassDecl) and it.name in self.records:
                rec = self.records[it.name]
                for m in it.functions:
                    if m.kind == "destructor":
                        continue
                    sig = self._make_sig(m, it.name)
                    self.sigs[id(m)] = sig
                    if m.kind == "constructor":
                        rec.ctors.append(sig)
                    else:
                        rec.methods.setdefault(m.name, []).append(sig)
        # a free definition whose prototype was dropped keeps one entry per signature
        for name, sigs in self.funcs.items():
            seen = {}
            for s in sigs:
                key = tuple(p.ctype.spelled() for p in s.params)
                if key in seen and s.decl.body is None:
                    continue
                seen[key] = s
            self.funcs[name] = list(seen.values())

    def _name_overloads(self):
        registry: dict[tuple[str, str], list[Signature]] = {}
        for name, sigs in self.funcs.items():
            for s in sigs:
                registry.setdefault(("", name), []).append(self._signature(s))
        for rec in self.records.values():
            for s in rec.ctors:
                registry.setdefault((rec.name, rec.name), []).append(self._signature(s))
            for name, sigs in rec.methods.items():
                for s in sigs:
                    registry.setdefault((rec.name, name), []).append(self._signature(s))
        self.names = rename_overloads(registry)
        for s in self.sigs.values():
            n = self.names.name_of(s.decl)
            s.rname = n if n == "main" else rust_ident(n)

    @staticmethod
    def _signature(s: FnSig) -> Signature:
        params = tuple(p.rtype.render() if p.rtype is not None else p.ctype.spelled() for p in s.params)
        return Signature(s.scope, s.decl.name, params, s.decl, s.required)

    def _receivers(self, rec: RecordInfo):
        if not rec.is_class:
            return
        direct: dict[int, bool] = {}
        calls: dict[int, set[str]] = {}
        flat = [s for sigs in rec.methods.values() for s in sigs]
        for s in flat:
            direct[id(s)], calls[id(s)] = self._method_writes(s, rec)
        mut = {id(s): direct[id(s)] for s in flat}
        changed = True
        while changed:
            changed = False
            for s in flat:
                if mut[id(s)]:
                    continue
                for m in calls[id(s)]:
                    if any(mut[id(o)] for o in rec.methods.get(m, [])):
                        mut[id(s)] = changed = True
                        break
        for s in flat:
            if not s.is_static:
                s.receiver = "&mut self" if mut[id(s)] else "&self"

    def _method_writes(self, s: FnSig, rec: RecordInfo) -> tuple[bool, set[str]]:
        body = s.decl.body
        if body is None:
            return False, set()
        local = AN.declared_names(body) | {p.name for p in s.params}

        def is_field(e) -> bool:
            r = AN.lvalue_root(e)
            if isinstance(r, A.Member) and isinstance(r.base, A.This):
                return True
            return isinstance(r, A.Name) and not r.qualifier and r.name not in local and \
                rec.find_field(r.name, self.records) is not None

        direct = any(is_field(t) for t in AN.written_targets(body))
        calls = set()
        for e in A.all_exprs(body):
            if isinstance(e, A.Unary) and e.op == "&" and is_field(e.operand):
                direct = True
            if isinstance(e, A.Call):
                f = e.func
                if isinstance(f, A.Name) and not f.qualifier and f.name not in local and f.name in rec.methods:
                    calls.add(f.name)
                elif isinstance(f, A.Member) and isinstance(f.base, A.This):
                    calls.add(f.name)
                elif isinstance(f, A.Member) and is_field(f.base):
                    if f.name in AN.MUTATING_METHODS or f.name not in ("size", "length", "empty", "c_str", "at", "back", "front"):
                        direct = True
        return direct, calls

    def _function_bodies(self):
        for cls, fn in self._all_functions():
            if fn.body is None:
                continue
            local = AN.declared_names(fn.body) | {p.name for p in fn.params if p.name}
            if cls is not None:
                local |= {f.name for f in cls.fields}
            yield fn.body, local

    def _collect_globals(self):
        writes = AN.global_writes(self._function_bodies())
        self.global_writes = writes
        for it in self.unit.items:
            if not isinstance(it, A.GlobalVarDecl) or it.is_extern:
                continue
            v = it.var
            const = it.from_define or (v.type.is_const and not v.type.is_pointer) or (
                v.type.is_pointer and v.type.const_ptr and v.type.is_const)
            if const:
                storage = "const"
            elif v.name in writes:
                storage = "lock" if self.config.global_strategy == "lock" else "unsafe"
            else:
                storage = "static"
            self.globals[v.name] = Sym(v.name, rust_ident(v.name), RType("auto"), "global", v.type, storage)

    # ----------------------------------------------------------- items

    def lower_item(self, it) -> list:
        if isinstance(it, A.OpaqueRegion):
            return [self._opaque(it)]
        if isinstance(it, A.GlobalVarDecl):
            return self._guard_item(it, "global", it.name, lambda: [self.lower_global(it)])
        if isinstance(it, A.FunctionDecl):
            return self._free_function(it)
        if isinstance(it, A.ClassDecl):
            if it.is_forward:
                self.ledger.append(converted(self.cid("class", it.loc, it.name), "forward-declaration-elided", it.loc))
                return []
            return self.lower_class(it)
        if isinstance(it, A.RecordDecl):
            if it.is_forward:
                self.ledger.append(converted(self.cid("struct", it.loc, it.name), "forward-declaration-elided", it.loc))
                return []
            return self._guard_item(it, "struct", it.name, lambda: [self._struct_item(self.records[it.name])])
        if isinstance(it, A.TypedefDecl):
            return self._guard_item(it, "typedef", it.name, lambda: self._typedef(it))
        raise TypeError(f"unexpected item {type(it).__name__}")

    def _guard_item(self, it, kind: str, name: str, fn) -> list:
        cid = self.cid(kind, it.loc, name)
        mark = len(self.ledger)
        try:
            out = fn()
        except Unconvertible as u:
            del self.ledger[mark:]
            self._reset_fn()
            self.ledger.append(unconverted(cid, kind, u.reason, it.loc, u.detail))
            return [T.UnconvertedBlock(u.reason, it.text, comments=list(it.comments))]
        finally:
            self._reset_fn()
        rule = self._item_rule.pop() if getattr(self, "_item_rule", None) else kind
        self.ledger.insert(mark, converted(cid, rule, it.loc))
        for o in out[:1]:
            o.comments = list(it.comments) + o.comments
        return out

    def _rule(self, name: str):
        self._item_rule = [name]

    def _opaque(self, r: A.OpaqueRegion) -> T.UnconvertedBlock:
        reason = r.detail if r.reason == "unsupported-construct" and r.detail else r.reason
        self.ledger.append(unconverted(self.cid("region", r.loc), "opaque-region", reason, r.loc, r.detail))
        return T.UnconvertedBlock(reason, r.text, comments=list(r.comments))

    def _typedef(self, it: A.TypedefDecl) -> list:
        t = self.resolve_typedef(it.type)
        if t.base == it.name or (t.pointer_depth == 0 and not t.is_array and t.base in self.records and
                                  (t.base == it.name or it.name in self.records)):
            self._rule("typedef-elided")
            return []
        rt = self.lower_type(it.type, "global")
        self._rule("type-alias")
        return [T.AliasItem(rust_ident(it.name), rt.render())]

    def lower_global(self, g: A.GlobalVarDecl):
        """Lower one global; the storage class was fixed by the write analysis."""
        v = g.var
        if g.is_extern:
            raise Unconvertible("extern-declaration", v.name)
        sym = self.globals[v.name]
        t = v.type
        if t.base == "char" and t.pointer_depth == 1 and sym.storage in ("const", "static"):
            rt = STR
        else:
            rt = self.lower_type(t, "global")
        sym.rtype = rt
        if v.init is not None and AN.contains_call(v.init):
            raise Unconvertible("dynamic-initializer", v.name)
        if v.ctor_args:
            raise Unconvertible("dynamic-initializer", v.name)
        if v.init is not None:
            self.scopes = [{}]
            value = self.coerce(self.ex(v.init, want=rt), rt).code
        else:
            if rt.kind == "record":
                rec = self.records[rt.name]
                if rec.ctors:
                    raise Unconvertible("dynamic-initializer", v.name)
                value = rec.zero_literal(self.records)
            else:
                value = zero_value(rt, self.records)
        if rt.kind in ("string", "vec") and value not in ("String::new()", "Vec::new()"):
            raise Unconvertible("dynamic-initializer", v.name)
        tt = rt.render()
        if rt.kind == "str":
            tt = "&'static str"
        public = not g.is_static
        if sym.storage == "const":
            self._rule("global-const")
            return T.ConstItem(sym.rname, tt, value, public)
        if sym.storage == "static":
            self._rule("global-static")
            return T.StaticItem(sym.rname, tt, value, public=public)
        if sym.storage == "lock":
            self._rule("global-lock")
            return T.StaticItem(sym.rname, tt, value, locked=True, public=public)
        self.unsafe_used = True
        self._rule("global-unsafe-static")
        return T.StaticItem(sym.rname, tt, value, mutable=True, public=public)

    def _struct_item(self, rec: RecordInfo) -> T.RecordItem:
        fields = []
        for f in rec.fields.values():
            entry_cid = self.cid("field", f.decl.loc, f.name)
            if f.rtype is None:
                self.ledger.append(unconverted(entry_cid, "field", f.error.reason, f.decl.loc, f.error.detail))
                fields.append(T.UnconvertedBlock(f.error.reason, f.decl.text or f.name, comments=list(f.decl.comments)))
                continue
            self.ledger.append(converted(entry_cid, "field", f.decl.loc))
            pub = f.public if rec.is_class else True
            fields.append(T.RecordField(f.rname, f.rtype.render(), pub, list(f.decl.comments)))
        if rec.base is not None:
            if rec.base not in self.records:
                raise Unconvertible("unknown-type", rec.base)
            fields.insert(0, T.RecordField("parent", self.records[rec.base].rname, True))
        self._rule("class" if rec.is_class else "struct")
        return T.RecordItem(rec.rname, fields, public=True)

    # ------------------------------------------------------- functions

    def _free_function(self, fn: A.FunctionDecl) -> list:
        if fn.qualifier:
            self.ledger.append(unconverted(self.cid("fn", fn.loc, fn.qualified_name), "function",
                                           "orphan-definition", fn.loc, fn.qualified_name))
            return [T.UnconvertedBlock("orphan-definition", fn.text, comments=list(fn.comments))]
        if fn.body is None:
            defined = any(isinstance(i, A.FunctionDecl) and i.body is not None and i.name == fn.name
                          for i in self.unit.items)
            if defined:
                self.ledger.append(converted(self.cid("fn", fn.loc, fn.name), "prototype-elided", fn.loc))
                return []
            self.ledger.append(unconverted(self.cid("fn", fn.loc, fn.name), "function",
                                           "missing-definition", fn.loc, fn.name))
            return [T.UnconvertedBlock("missing-definition", fn.text, comments=list(fn.comments))]
        sig = self.sigs[id(fn)]
        return self._guard_item(fn, "fn", fn.name, lambda: [self.lower_function(sig)])

    def lower_function(self, sig: FnSig, rec: Optional[RecordInfo] = None) -> T.FnItem:
        fn = sig.decl
        if sig.error is not None:
            raise sig.error
        self._reset_fn()
        self.cls = rec
        self.fn_body = fn.body
        self.fn_ret = sig.ret
        self.fn_mut = AN.written_roots(fn.body) | AN.reassigned_names(fn.body)
        self.fn_reassigned = AN.reassigned_names(fn.body)
        self.is_main = fn.name == "main" and rec is None
        self.is_ctor = fn.kind == "constructor"
        if rec is not None and not sig.is_static:
            self.self_name = "this" if self.is_ctor else "self"
        scope: dict[str, Sym] = {}
        params = []
        prologue = []
        if self.is_main and fn.params:
            prologue = self._main_args(fn, scope)
        else:
            for p in sig.params:
                scope[p.name] = Sym(p.name, p.rname, p.rtype, "param", p.ctype)
                params.append(T.Param(p.rname, p.rtype.render(), p.mutable))
        self.scopes = [scope]
        if self.is_ctor:
            body = self._ctor_body(sig, rec)
        else:
            body = prologue + self.block_list(fn.body.body, final=True)
            if sig.ret is not None and not _diverges(body):
                body.append(T.Tail("unreachable!()"))
        self._rule("main" if self.is_main else fn.kind)
        public = not self.is_main and (rec is None or fn.access == "public")
        ret = sig.ret.render() if sig.ret is not None else None
        if self.is_ctor:
            ret = rec.rname
        return T.FnItem(sig.rname, params, ret, body, public=public, inline=fn.is_inline,
                        receiver=sig.receiver if rec is not None and not self.is_ctor else None)

    def _main_args(self, fn: A.FunctionDecl, scope) -> list:
        if len(fn.params) != 2:
            raise Unconvertible("main-signature", f"{len(fn.params)} parameters")
        argc, argv = fn.params[0].name or "_argc", fn.params[1].name or "_argv"
        vec_t = RType("vec", inner=STRING)
        scope[argv] = Sym(argv, rust_ident(argv), vec_t, "local")
        scope[argc] = Sym(argc, rust_ident(argc), RType("scalar", "i32"), "local")
        return [
            T.Let(rust_ident(argv), vec_t.render(), "std::env::args().collect()"),
            T.Let(rust_ident(argc), "i32", f"{rust_ident(argv)}.len() as i32", argc in self.fn_mut),
        ]

    def _ctor_body(self, sig: FnSig, rec: RecordInfo) -> list:
        fn = sig.decl
        inits = {name: args for name, args in fn.init_list}
        parts = []
        allocs = []
        if rec.base is not None:
            base = self.records.get(rec.base)
            if base is None:
                raise Unconvertible("unknown-type", rec.base)
            if rec.base in inits:
                parts.append(f"parent: {self.construct(base, inits.pop(rec.base)).code}")
            else:
                parts.append(f"parent: {base.default_value(self.records)}")
        for f in rec.fields.values():
            if f.rtype is None:
                if f.name in inits:
                    raise Unconvertible("unconverted-field", f.name)
                continue
            if f.name in inits:
                args = inits.pop(f.name)
                v = self._field_init(f, args)
                if len(args) == 1 and isinstance(args[0], A.HeapAlloc) and args[0].count is not None:
                    allocs.append((f.name, args[0]))
            elif f.decl is not None and f.decl.default is not None:
                v = self.coerce(self.ex(f.decl.default, want=f.rtype), f.rtype).code
            elif f.rtype.kind == "record":
                v = self.records[f.rtype.name].default_value(self.records)
            else:
                v = zero_value(f.rtype, self.records)
            parts.append(f"{f.rname}: {v}")
        if inits:
            raise Unconvertible("unknown-field", ", ".join(inits))
        literal = f"{rec.rname} {{ {', '.join(parts)} }}" if parts else f"{rec.rname} {{}}"
        self.self_name = "this"
        self.scopes.append({})
        stmts = self.block_list(fn.body.body, final=True, first_prev=allocs or None) if fn.body else []
        self.scopes.pop()
        explicit = self.config.return_style == "explicit"
        if not stmts:
            return [T.Return(literal) if explicit else T.Tail(literal)]
        return [T.Let("this", None, literal, True)] + stmts + [T.Return("this") if explicit else T.Tail("this")]

    def _field_init(self, f: FieldInfo, args: list) -> str:
        t = f.rtype
        if t.kind == "record":
            return self.construct(self.records[t.name], args).code
        if len(args) == 1:
            return self.coerce(self.ex(args[0], want=t), t).code
        if not args:
            return zero_value(t, self.records)
        raise Unconvertible("constructor-call", f.name)

    # --------------------------------------------------------- classes

    def lower_class(self, c: A.ClassDecl) -> list:
        rec = self.records[c.name]
        cid = self.cid("class", c.loc, c.name)
        mark = len(self.ledger)
        try:
            if len(c.bases) > 1:
                raise Unconvertible("multiple-inheritance", c.name)
            item = self._struct_item(rec)
            self._item_rule = []
        except Unconvertible as u:
            del self.ledger[mark:]
            self.ledger.append(unconverted(cid, "class", u.reason, c.loc, u.detail))
            return [T.UnconvertedBlock(u.reason, c.text, comments=list(c.comments))]
        self.ledger.insert(mark, converted(cid, "class", c.loc))
        item.comments = list(c.comments)
        members = []
        drop = None
        for m in c.members:
            if isinstance(m, A.FieldDecl):
                continue
            if isinstance(m, A.AccessLabel):
                if m.access == "protected":
                    self.ledger.append(unconverted(self.cid("access", m.loc), "access-label",
                                                   "access-specifier", m.loc, "protected"))
                    members.append(T.UnconvertedBlock("access-specifier", m.text or "protected:"))
                continue
            if isinstance(m, A.MemberOpaque):
                reason = m.detail or m.reason
                self.ledger.append(unconverted(self.cid("member", m.loc), "member", reason, m.loc, m.detail))
                members.append(T.UnconvertedBlock(reason, m.text, comments=list(m.comments)))
                if reason == "friend-class":
                    self.note("warning", "friend-class", f"friend declaration in {c.name} dropped", m.loc)
                continue
            if m.kind == "destructor":
                drop = self.handle_destructor(c, m)
                continue
            members += self._member_fn(rec, m)
        out = [item]
        if members:
            out.append(T.ImplItem(rec.rname, members))
        if drop is not None:
            out += drop
        return out

    def _member_fn(self, rec: RecordInfo, m: A.FunctionDecl) -> list:
        if m.body is None:
            self.ledger.append(unconverted(self.cid("method", m.loc, m.name), m.kind,
                                           "missing-definition", m.loc, m.name))
            return [T.UnconvertedBlock("missing-definition", m.text, comments=list(m.comments))]
        if m.is_virtual:
            self.note("info", "virtual-dispatch", f"{rec.name}::{m.name} lowered with static dispatch", m.loc)
        sig = self.sigs[id(m)]
        return self._guard_item(m, "method", m.name, lambda: [self.lower_function(sig, rec)])

    def handle_destructor(self, c: A.ClassDecl, d: A.FunctionDecl) -> Optional[list]:
        """Drop impl for the statements that remain once frees are elided."""
        rec = self.records[c.name]
        if d.body is None:
            self.ledger.append(unconverted(self.cid("destructor", d.loc, c.name), "destructor",
                                           "missing-definition", d.loc, d.name))
            return [T.UnconvertedBlock("missing-definition", d.text, comments=list(d.comments))]
        cid = self.cid("destructor", d.loc, c.name)
        mark = len(self.ledger)
        self._reset_fn()
        self.cls = rec
        self.self_name = "self"
        self.fn_body = d.body
        self.fn_mut = AN.written_roots(d.body)
        self.scopes = [{}]
        try:
            body = self.block_list(d.body.body, final=True)
        finally:
            self._reset_fn()
        if _only_fences_or_empty(body) and not body:
            self.ledger.insert(mark, converted(cid, "destructor-elided", d.loc))
            self.note("info", "destructor-elided", f"{c.name} destructor only released memory", d.loc)
            return None
        self.ledger.insert(mark, converted(cid, "drop-impl", d.loc))
        fn = T.FnItem("drop", [], None, body, receiver="&mut self", comments=list(d.comments))
        return [T.ImplItem(rec.rname, [fn], trait_name="Drop")]

    def _apply_derives(self, items: list):
        need = set(self.clone_needed)
        changed = True
        while changed:
            changed = False
            for name in list(need):
                rec = self.records.get(name)
                if rec is None:
                    continue
                deps = {f.rtype for f in rec.fields.values() if f.rtype is not None}
                if rec.base:
                    deps.add(record(rec.base))
                for t in deps:
                    while t is not None and t.kind != "record":
                        t = t.inner
                    if t is not None and t.name not in need:
                        need.add(t.name)
                        changed = True
        for it in items:
            if isinstance(it, T.RecordItem) and any(it.name == self.records[n].rname for n in need if n in self.records):
                it.derives = ["Clone"]


def _diverges(body: list) -> bool:
    if not body:
        return False
    last = body[-1]
    if isinstance(last, (T.Tail, T.Return)):
        return True
    if isinstance(last, T.ExprStmt) and last.expr.startswith(("std::process::exit(", "panic!(", "unreachable!(")):
        return True
    if isinstance(last, T.If) and last.other is not None:
        return _diverges(last.then) and _diverges(last.other)
    if isinstance(last, T.Loop) and last.label is None and not _has_break(last.body):
        return True
    if isinstance(last, T.Block) and last.label is None:
        return _diverges(last.body)
    if isinstance(last, T.Match):
        return all(_diverges(a.body) for a in last.arms)
    return False


def _has_break(body: list) -> bool:
    for s in body:
        if isinstance(s, T.Break):
            return True
        if isinstance(s, (T.Loop, T.While, T.ForRange, T.ForEach)):
            if any(_labeled_break(x) for x in s.body):
                return True
            continue
        for child in T._child_bodies(s):
            if _has_break(child):
                return True
    return False


def _labeled_break(s) -> bool:
    if isinstance(s, T.Break) and s.label is not None:
        return True
    return any(_labeled_break(x) for child in T._child_bodies(s) for x in child)


def _only_fences_or_empty(body: list) -> bool:
    return all(isinstance(s, T.UnconvertedStmt) for s in body)


def lower_unit(unit: A.TranslationUnit, config: Optional[LoweringConfig] = None):
    """Lower a translation unit; returns ``(TargetUnit, ledger)``."""
    return Lowerer(unit, config).run()
