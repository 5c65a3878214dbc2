"""Target-side types and the scalar/pointer lowering table."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from ..frontend import ast as A
from .ledger import Unconvertible

SCALARS = {
    "int": "i32", "unsigned int": "u32",
    "short": "i16", "unsigned short": "u16",
    "long": "i64", "unsigned long": "u64",
    "long long": "i64", "unsigned long long": "u64",
    "char": "u8", "signed char": "i8", "unsigned char": "u8",
    "float": "f32", "double": "f64", "bool": "bool",
    "size_t": "usize",
    "int8_t": "i8", "int16_t": "i16", "int32_t": "i32", "int64_t": "i64",
    "uint8_t": "u8", "uint16_t": "u16", "uint32_t": "u32", "uint64_t": "u64",
}

INT_BITS = {"i8": 8, "u8": 8, "i16": 16, "u16": 16, "i32": 32, "u32": 32, "i64": 64, "u64": 64, "usize": 64, "isize": 64}
POSITIONS = ("field", "parameter", "local", "return", "global")


@dataclass(frozen=True)
class RType:
    """A lowered type.

    kind is one of scalar, unit, str, string, record, vec, array, slice,
    box, option, ref, null, auto.
    """

    kind: str
    name: str = ""
    inner: Optional["RType"] = None
    mutable: bool = False
    size: Optional[str] = None
    lifetime: Optional[str] = None

    def render(self) -> str:
        k = self.kind
        lt = f"'{self.lifetime} " if self.lifetime else ""
        if k == "scalar":
            return self.name
        if k == "unit":
            return "()"
        if k == "str":
            return f"&{lt}str"
        if k == "string":
            return "String"
        if k == "record":
            return f"{self.name}<'{self.lifetime}>" if self.lifetime else self.name
        if k == "vec":
            return f"Vec<{self.inner.render()}>"
        if k == "array":
            return f"[{self.inner.render()}; {self.size}]"
        if k == "slice":
            return f"&{lt}{'mut ' if self.mutable else ''}[{self.inner.render()}]"
        if k == "box":
            return f"Box<{self.inner.render()}>"
        if k == "option":
            return f"Option<{self.inner.render()}>"
        if k == "ref":
            return f"&{lt}{'mut ' if self.mutable else ''}{self.inner.render()}"
        if k == "auto":
            return "_"
        raise ValueError(f"cannot render {k}")

    __str__ = render

    # predicates used by the expression lowering
    @property
    def is_int(self) -> bool:
        return self.kind == "scalar" and self.name in INT_BITS

    @property
    def is_float(self) -> bool:
        return self.kind == "scalar" and self.name in ("f32", "f64")

    @property
    def is_numeric(self) -> bool:
        return self.is_int or self.is_float

    @property
    def is_bool(self) -> bool:
        return self.kind == "scalar" and self.name == "bool"

    @property
    def is_signed(self) -> bool:
        return self.kind == "scalar" and self.name.startswith("i")

    @property
    def is_copy(self) -> bool:
        if self.kind in ("scalar", "unit", "str", "null"):
            return True
        if self.kind == "ref":
            return not self.mutable
        if self.kind == "option" and self.inner is not None and self.inner.kind == "ref":
            return not self.inner.mutable
        if self.kind == "array":
            return self.inner.is_copy
        return False

    @property
    def is_pointerlike(self) -> bool:
        return self.kind in ("box", "option", "ref", "slice", "vec")

    def pointee(self) -> Optional["RType"]:
        """The value type reached by one C-level dereference."""
        if self.kind in ("box", "ref", "vec", "slice", "array"):
            return self.inner
        if self.kind == "option":
            return self.inner.pointee()
        return None


def scalar(name: str) -> RType:
    return RType("scalar", name)


UNIT = RType("unit")
BOOL = scalar("bool")
I32 = scalar("i32")
USIZE = scalar("usize")
STR = RType("str")
STRING = RType("string")
NULL = RType("null")


def record(name: str, lifetime: Optional[str] = None) -> RType:
    return RType("record", name, lifetime=lifetime)


def box(inner: RType) -> RType:
    return RType("box", inner=inner)


def option(inner: RType) -> RType:
    return RType("option", inner=inner)


def ref(inner: RType, mutable: bool, lifetime: Optional[str] = None) -> RType:
    return RType("ref", inner=inner, mutable=mutable, lifetime=lifetime)


def vec(inner: RType) -> RType:
    return RType("vec", inner=inner)


def slice_of(inner: RType, mutable: bool) -> RType:
    return RType("slice", inner=inner, mutable=mutable)


def with_lifetime(t: RType, lt: str) -> RType:
    if t.kind in ("ref", "str", "slice"):
        return replace(t, lifetime=lt)
    if t.kind == "option" and t.inner is not None and t.inner.kind in ("ref", "str"):
        return replace(t, inner=replace(t.inner, lifetime=lt))
    return t


def needs_lifetime(t: RType) -> bool:
    if t.kind in ("ref", "str", "slice"):
        return True
    if t.kind == "option":
        return needs_lifetime(t.inner)
    return False


def promote(t: RType) -> RType:
    """C integer promotion."""
    if t.is_bool:
        return I32
    if t.is_int and INT_BITS[t.name] < 32:
        return I32
    return t


def common_type(a: RType, b: RType) -> RType:
    """The usual arithmetic conversions, on lowered scalars."""
    if a.is_float or b.is_float:
        if "f64" in (a.name, b.name):
            return scalar("f64")
        return scalar("f32")
    a, b = promote(a), promote(b)
    if a.name == b.name:
        return a
    ra, rb = INT_BITS[a.name], INT_BITS[b.name]
    if a.is_signed == b.is_signed:
        return a if ra >= rb else b
    signed, unsigned = (a, b) if a.is_signed else (b, a)
    rs, ru = INT_BITS[signed.name], INT_BITS[unsigned.name]
    if ru >= rs:
        return unsigned
    return signed  # the signed type can represent every unsigned value


def lower_scalar(base: str) -> Optional[RType]:
    if base == "void":
        return UNIT
    name = SCALARS.get(base)
    return scalar(name) if name else None


def lower_type(
    t: A.TypeRef,
    position: str,
    *,
    owner: Optional[str] = None,
    records: frozenset = frozenset(),
    hints: frozenset = frozenset(),
    extent: Optional[str] = None,
) -> RType:
    """Lower a source type for a given position.

    ``records`` names the user record types in scope. ``hints`` carries the
    usage facts the pointer rules need: indexed, nullable, reassigned,
    written, heap, array-owner, borrow, alias. ``extent`` is the rendered
    array length, when the declarator has one.
    """
    if position not in POSITIONS:
        raise ValueError(f"unknown position {position!r}")
    depth = t.pointer_depth
    if depth >= 2 or (depth >= 1 and t.is_array):
        raise Unconvertible("multi-level-pointer", t.spelled())
    base = _lower_base(t, records)
    if t.is_array:
        if position == "parameter":
            return slice_of(base, mutable=not t.is_const)
        if extent is None:
            raise Unconvertible("unsized-array", t.spelled())
        return RType("array", inner=base, size=extent)
    if depth == 0 and not t.is_reference:
        if base.kind == "unit" and position != "return":
            raise Unconvertible("void-value", t.spelled())
        return base
    if t.is_reference:
        if depth:
            raise Unconvertible("multi-level-pointer", t.spelled())
        if position == "return":
            raise Unconvertible("reference-return", t.spelled())
        if position in ("global", "local") and position == "global":
            raise Unconvertible("reference-global", t.spelled())
        if base.kind == "string":
            return STR if t.is_const else ref(STRING, True)
        if base.kind == "vec" and t.is_const:
            return ref(base, False)
        return ref(base, mutable=not t.is_const)
    # a single pointer level from here on
    if t.base == "void":
        raise Unconvertible("void-pointer", t.spelled())
    if t.base == "char" and t.is_const:
        return STR
    if t.base == "char" and "string" in hints:
        return STR
    if position == "field":
        if owner is not None and t.base == owner:
            return option(box(base))
        if base.kind == "record":
            raise Unconvertible("aliasing-unknown", f"pointer field to {t.base}")
        if "array-owner" in hints:
            return vec(base)
        if "heap" in hints:
            return option(box(base))
        raise Unconvertible("aliasing-unknown", f"pointer field {t.spelled()}")
    if position == "parameter":
        if "freed" in hints:
            raise Unconvertible("ownership-transfer", "parameter is freed by the callee")
        if "indexed" in hints:
            return slice_of(base, mutable=not t.is_const)
        if "nullable" in hints or "reassigned" in hints:
            if "written" in hints:
                raise Unconvertible("aliasing-unknown", "nullable pointer parameter written through")
            return option(ref(base, False))
        return ref(base, mutable=not t.is_const)
    if position == "return":
        if "heap" in hints:
            return option(box(base)) if "nullable" in hints else box(base)
        raise Unconvertible("pointer-return", t.spelled())
    if position == "global":
        raise Unconvertible("global-pointer", t.spelled())
    # local
    kinds = hints & {"heap", "array-owner", "borrow", "alias"}
    if kinds == {"array-owner"}:
        return vec(base)
    if kinds == {"heap"}:
        return option(box(base)) if "nullable" in hints else box(base)
    if kinds == {"borrow"} and "reassigned" not in hints:
        return ref(base, mutable=not t.is_const and "written" in hints)
    if kinds <= {"alias"} and "written" not in hints:
        if not kinds and "nullable" not in hints:
            raise Unconvertible("aliasing-unknown", f"pointer local {t.spelled()} with no known target")
        return option(ref(base, False))
    raise Unconvertible("aliasing-unknown", f"pointer local {t.spelled()}")


def _lower_base(t: A.TypeRef, records: frozenset) -> RType:
    b = t.base
    s = lower_scalar(b)
    if s is not None:
        return s
    if b == "std::string":
        return STRING
    if b == "std::vector":
        if len(t.args) != 1:
            raise Unconvertible("template", t.spelled())
        inner = lower_type(t.args[0], "field", records=records) if not t.args[0].is_pointer else None
        if inner is None:
            raise Unconvertible("multi-level-pointer", t.spelled())
        return vec(inner)
    if b == "auto":
        return RType("auto")
    if b in records:
        return record(b)
    raise Unconvertible("unknown-type", b)


def zero_value(t: RType, records: Optional[dict] = None) -> str:
    """A literal of the type's zero value, used for uninitialized storage."""
    k = t.kind
    if k == "scalar":
        if t.is_bool:
            return "false"
        if t.is_float:
            return "0.0"
        return "0"
    if k == "unit":
        return "()"
    if k == "str":
        return '""'
    if k == "string":
        return "String::new()"
    if k == "vec":
        return "Vec::new()"
    if k == "array":
        return f"[{zero_value(t.inner, records)}; {t.size}]"
    if k == "option":
        return "None"
    if k == "box":
        return f"Box::new({zero_value(t.inner, records)})"
    if k == "record":
        if records is not None and t.name in records:
            return records[t.name].zero_literal(records)
        raise Unconvertible("no-zero-value", t.name)
    raise Unconvertible("no-zero-value", t.render())
