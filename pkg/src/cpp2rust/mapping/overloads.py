"""Deterministic renaming of overloaded functions.

The target language has no overloading, so each overload set gets
arity-suffixed names, with the lowered parameter types appended when two
members share an arity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..errors import DuplicateDefinitionError
from ..frontend import ast as A

_TYPE_WORDS = [("&mut ", "mutref_"), ("&", "ref_"), ("[", "slice_"), ("<", "_"), ("::", "_")]


def sanitize_type(name: str) -> str:
    """Turn a rendered type into an identifier fragment."""
    s = name
    for a, b in _TYPE_WORDS:
        s = s.replace(a, b)
    s = re.sub(r"\W+", "_", s)
    return s.strip("_") or "unit"


def overload_names(name: str, signatures: Sequence[Sequence[str]]) -> list[str]:
    """Names for one overload set, in input order.

    ``signatures`` lists the lowered parameter type names of each member.
    Identical signatures raise :class:`DuplicateDefinitionError`.
    """
    sigs = [tuple(s) for s in signatures]
    if len(sigs) <= 1:
        return [name] * len(sigs)
    seen: dict[tuple, int] = {}
    for i, s in enumerate(sigs):
        if s in seen:
            where = (name, seen[s], seen[s])
            raise DuplicateDefinitionError(f"{name}({', '.join(s)})", where, (name, i, i))
        seen[s] = i
    by_arity: dict[int, int] = {}
    for s in sigs:
        by_arity[len(s)] = by_arity.get(len(s), 0) + 1
    out = []
    for s in sigs:
        n = f"{name}_{len(s)}"
        if by_arity[len(s)] > 1:
            n += "_" + "_".join(sanitize_type(t) for t in s) if s else ""
        out.append(n)
    # sanitizing can in principle map distinct types onto one fragment
    counts: dict[str, int] = {}
    for n in out:
        counts[n] = counts.get(n, 0) + 1
    if any(c > 1 for c in counts.values()):
        used: dict[str, int] = {}
        for i, n in enumerate(out):
            if counts[n] > 1:
                used[n] = used.get(n, 0) + 1
                out[i] = f"{n}_{used[n]}"
    return out


@dataclass
class Signature:
    scope: str  # "" for free functions, else the class name
    name: str
    params: tuple[str, ...]
    decl: Optional[A.FunctionDecl] = None
    required: int = 0


@dataclass
class NameMap:
    """Target names for every function, keyed by declaration identity."""

    by_decl: dict[int, str] = field(default_factory=dict)
    sets: dict[tuple[str, str], list[Signature]] = field(default_factory=dict)

    def name_of(self, decl: A.FunctionDecl) -> str:
        return self.by_decl[id(decl)]

    def mapping(self) -> dict[tuple[str, str, tuple[str, ...]], str]:
        """Flat view: (scope, name, param types) -> target name."""
        return {
            (s.scope, s.name, s.params): self.by_decl[id(s.decl)]
            for sigs in self.sets.values() for s in sigs
        }


def rename_overloads(registry: dict[tuple[str, str], list[Signature]]) -> NameMap:
    """Apply :func:`overload_names` to every set in the registry."""
    nm = NameMap(sets=registry)
    for (scope, name), sigs in sorted(registry.items()):
        base = "new" if scope and name == scope else name
        names = overload_names(base, [s.params for s in sigs])
        for s, n in zip(sigs, names):
            nm.by_decl[id(s.decl)] = n
    return nm
