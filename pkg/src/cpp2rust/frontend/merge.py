"""Merge the .h / .icc / .cc files of one logical module into one unit."""

from __future__ import annotations

import copy
import os
from typing import Optional

from ..diagnostics import Diagnostic
from ..errors import DuplicateDefinitionError, OrphanDefinitionError
from . import ast as A


def _span(d: A.Decl) -> tuple:
    return (d.loc.file, d.loc.line, d.loc.end_line)


def _stem(path: str) -> str:
    base = os.path.basename(path)
    return base.rsplit(".", 1)[0] if "." in base else base


def _signature(fn: A.FunctionDecl) -> tuple:
    return tuple(p.type.spelled() for p in fn.params)


def _is_plumbing(region: A.OpaqueRegion, stems: set[str]) -> bool:
    """True for a conditional block that only includes sibling files."""
    if region.reason != "preprocessor-conditional":
        return False
    lines = [ln.strip() for ln in region.text.splitlines() if ln.strip()]
    saw_sibling = False
    for ln in lines:
        if not ln.startswith("#"):
            return False
        words = ln[1:].split()
        if words and words[0] == "include" and '"' in ln:
            target = ln.split('"')[1]
            saw_sibling |= _stem(target) in stems
    return saw_sibling


def _find_member(cls: A.ClassDecl, fn: A.FunctionDecl) -> Optional[int]:
    same = [
        i for i, m in enumerate(cls.members)
        if isinstance(m, A.FunctionDecl) and m.kind == fn.kind and m.name == fn.name
    ]
    for i in same:
        if _signature(cls.members[i]) == _signature(fn):
            return i
    loose = [i for i in same if cls.members[i].arity == fn.arity and cls.members[i].body is None]
    if len(loose) == 1:
        return loose[0]
    return None


def attach_definitions(unit: A.TranslationUnit, strict: bool = True) -> A.TranslationUnit:
    """Move qualified out-of-class definitions into their class, in place."""
    classes = {i.name: i for i in unit.items if isinstance(i, A.ClassDecl) and not i.is_forward}
    kept = []
    for item in unit.items:
        if not (isinstance(item, A.FunctionDecl) and item.qualifier):
            kept.append(item)
            continue
        cls = classes.get(item.qualifier)
        if cls is None:
            if strict:
                raise OrphanDefinitionError(item.qualified_name, (item.loc.file, item.loc.line))
            kept.append(item)
            continue
        idx = _find_member(cls, item)
        if idx is None:
            member = copy.copy(item)
            member.qualifier = None
            member.access = "public"
            cls.members.append(member)
            continue
        proto = cls.members[idx]
        if proto.body is not None:
            if item.body is None:
                continue
            raise DuplicateDefinitionError(item.qualified_name, _span(proto), _span(item))
        if item.body is None:
            continue
        merged = copy.copy(item)
        merged.qualifier = None
        merged.access = proto.access
        merged.is_static = proto.is_static or item.is_static
        merged.is_virtual = proto.is_virtual
        merged.is_inline = proto.is_inline or item.is_inline
        merged.is_const_method = proto.is_const_method or item.is_const_method
        merged.comments = item.comments or proto.comments
        # default arguments live on the declaration
        merged.params = [
            A.Param(p.name or q.name, p.type, q.default if q.default is not None else p.default)
            for p, q in zip(item.params, proto.params)
        ]
        cls.members[idx] = merged
    unit.items = kept
    return unit


def merge_units(
    decl: A.TranslationUnit,
    inline: Optional[A.TranslationUnit] = None,
    impl: Optional[A.TranslationUnit] = None,
    strict: bool = True,
) -> A.TranslationUnit:
    """Combine the parts of one module; the inputs are not modified."""
    parts = [u for u in (decl, inline, impl) if u is not None]
    parts = [copy.deepcopy(u) for u in parts]
    stems = {_stem(f) for u in parts for f in (u.files or [u.name])} | {u.name for u in parts}
    out = A.TranslationUnit(name=parts[0].name, files=[f for u in parts for f in u.files])
    for u in parts:
        for item in u.items:
            if isinstance(item, A.OpaqueRegion) and _is_plumbing(item, stems):
                out.diagnostics.append(Diagnostic(
                    "info", "merge-plumbing", item.loc.file, item.loc.line,
                    "conditional inclusion block removed by merging",
                ))
                continue
            out.items.append(item)
        for d in u.directives:
            if d.kind == "guard":
                continue
            if d.kind == "include" and not d.system:
                if _stem(d.target) in stems:
                    continue
                out.diagnostics.append(Diagnostic(
                    "warning", "unresolved-include", d.loc.file, d.loc.line,
                    f'dependency "{d.target}" is not part of this module; include dropped',
                ))
                continue
            out.directives.append(d)
        out.diagnostics.extend(u.diagnostics)
    _check_duplicates(out)
    return attach_definitions(out, strict=strict)


def _check_duplicates(unit: A.TranslationUnit) -> None:
    seen: dict[tuple, A.FunctionDecl] = {}
    for item in unit.items:
        if isinstance(item, A.FunctionDecl) and item.body is not None:
            key = (item.qualified_name, item.kind, _signature(item))
            if key in seen:
                raise DuplicateDefinitionError(item.qualified_name, _span(seen[key]), _span(item))
            seen[key] = item
