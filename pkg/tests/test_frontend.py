from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpp2rust.errors import DuplicateDefinitionError, LexError, OrphanDefinitionError
from cpp2rust.frontend import ast as A
from cpp2rust.frontend import detokenize, merge_units, parse_source, parse_unit, tokenize
from cpp2rust.frontend.lexer import TokenKind as K

from support import BOOL_ARRAY, CORPUS

CLASS_C = """
class C {
public:
    int a, b, c;
    C(int x, int y, int z) { a = x; b = y; c = z; }
    void method1(int v) { a = v; }
    int method2() { return a + b + c; }
};
"""


def kinds(text):
    return [(t.kind, t.text) for t in tokenize(text) if t.kind != K.COMMENT]


def test_tokenize_declaration():
    assert kinds("int n = 9;") == [
        (K.KEYWORD, "int"), (K.IDENT, "n"), (K.PUNCT, "="), (K.INT, "9"), (K.PUNCT, ";"),
    ]


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_ternary_has_seven_tokens():
    toks = tokenize("x > 5 ? 10 : 7")
    assert len(toks) == 7
    assert [t.text for t in toks if t.kind == K.PUNCT] == [">", "?", ":"]


def test_positions_point_at_first_byte():
    src = "int a;\n  float b = 1.5f; // tail\n#define X 1\n"
    for t in tokenize(src):
        lines = src.split("\n")
        assert lines[t.line - 1][t.col - 1:].startswith(t.text.split("\n")[0])


def test_comments_and_directives_are_tokens():
    toks = tokenize('/* a */ #include "x.h"\nint y; // b\n')
    assert [t.kind for t in toks if t.kind in (K.COMMENT, K.DIRECTIVE)] == [K.COMMENT, K.DIRECTIVE, K.COMMENT]


@pytest.mark.parametrize("bad", ['char *s = "abc', "/* never closed", "char c = 'x"])
def test_unterminated_literal_is_lex_error(bad):
    with pytest.raises(LexError) as exc:
        tokenize(bad)
    assert exc.value.line == 1 and exc.value.col >= 1


def test_corpus_lexing_is_lossless():
    files = sorted(p for p in CORPUS.rglob("*") if p.is_file())
    assert files
    for p in files:
        src = p.read_text(encoding="latin-1")
        assert detokenize(tokenize(src), src) == src, p.name


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(
    ["int", " ", "\n", "x1", "42", "3.5", "'a'", '"s"', "+", "->", "<<=", "/* c */", "// l\n", "(", ")", ";", "\t"]
), max_size=40))
def test_lexing_is_lossless_on_token_soup(parts):
    src = " ".join(parts)
    assert detokenize(tokenize(src), src) == src


def test_parse_class_listing():
    unit = parse_source(CLASS_C, "c")
    (cls,) = [i for i in unit.items if isinstance(i, A.ClassDecl)]
    assert cls.name == "C"
    assert [f.name for f in cls.fields] == ["a", "b", "c"]
    assert all(f.type.base == "int" for f in cls.fields)
    assert len(cls.constructors) == 1 and len(cls.methods) == 2


def test_parse_empty_tokens():
    unit = parse_unit([], "empty")
    assert unit.items == [] and unit.opaque_regions == []


def test_self_referential_record():
    unit = parse_source("struct Node { int data; struct Node* next; };", "n")
    (rec,) = unit.items
    assert isinstance(rec, (A.RecordDecl, A.ClassDecl))
    nxt = [f for f in rec.fields if f.name == "next"][0]
    assert nxt.type.base == "Node" and nxt.type.pointer_depth == 1


def test_malloc_cast_parses_like_new():
    a = parse_source("struct T { int v; }; void f() { struct T* p = (struct T*)malloc(sizeof(struct T)); }", "m")
    b = parse_source("struct T { int v; }; void f() { T* p = new T; }", "m")
    init = lambda u: u.items[-1].body.body[0].decls[0].init
    assert isinstance(init(a), A.HeapAlloc) and isinstance(init(b), A.HeapAlloc)
    assert init(a).type.base == init(b).type.base == "T"


def test_multiple_inheritance_is_opaque():
    unit = parse_source("struct A {}; struct B {}; struct C : A, B { int c; };", "mi")
    assert isinstance(unit.items[-1], A.OpaqueRegion)


def test_recovery_resumes_after_bad_region():
    src = "int ok1() { return 1; }\nint x = = 3;\nint ok2() { return 2; }\n"
    unit = parse_source(src, "r")
    names = [i.name for i in unit.items if isinstance(i, A.FunctionDecl)]
    assert names == ["ok1", "ok2"]
    (region,) = unit.opaque_regions
    assert region.text in src


def test_template_recovers_to_opaque_region():
    unit = parse_source("template <class T> T twice(T v) { return v + v; }\nint z = 0;\n", "t")
    region = unit.items[0]
    assert isinstance(region, A.OpaqueRegion) and region.detail == "template"
    assert isinstance(unit.items[1], A.GlobalVarDecl)


def test_optimize_conditional_is_opaque():
    unit = parse_source("#ifdef __OPTIMIZE__\nint a;\n#endif\nint b;\n", "p")
    assert unit.items[0].reason == "preprocessor-conditional"


def _line_cover(unit):
    lines = []
    for it in unit.items:
        lines += range(it.loc.line, it.loc.end_line + 1)
    return lines


@pytest.mark.parametrize("name", ["Fibonacci.c", "LinkedList.c", "Catalan.cpp", "Constructors.cpp"])
def test_items_do_not_overlap(name):
    unit = parse_source((CORPUS / name).read_text(), name.split(".")[0], name)
    covered = _line_cover(unit)
    assert len(covered) == len(set(covered))


def test_parse_is_deterministic():
    src = (CORPUS / "Catalan.cpp").read_text()
    assert repr(parse_source(src, "Catalan")) == repr(parse_source(src, "Catalan"))


def _bool_array_parts():
    return [parse_source(p.read_text(), "bool-array", str(p)) for p in BOOL_ARRAY]


def test_merge_bool_array_triple():
    unit = merge_units(*_bool_array_parts())
    (cls,) = [i for i in unit.items if isinstance(i, A.ClassDecl)]
    assert cls.name == "Bool_Array"
    bodies = {f.name: f.body is not None for f in cls.functions}
    assert bodies["set_bit"] and bodies["clear"] and bodies["Bool_Array"]
    assert cls.destructor is not None and cls.destructor.body is not None
    assert not any(isinstance(i, A.FunctionDecl) and i.qualifier for i in unit.items)
    assert unit.guard is None or all(d.kind != "guard" for d in unit.directives)
    assert not any(d.kind == "include" and "bool-array" in d.target for d in unit.directives)


def test_merge_single_unit_strips_guard_only():
    src = "#ifndef X_H\n#define X_H\nint f(int a) { return a; }\n#endif\n"
    unit = parse_source(src, "x", "x.h")
    merged = merge_units(unit)
    assert [type(i) for i in merged.items] == [type(i) for i in unit.items]
    assert all(d.kind != "guard" for d in merged.directives)


def test_merge_duplicate_definition():
    h, icc, cc = _bool_array_parts()
    clear = "void Bool_Array::clear (void) { }\n"
    cc2 = parse_source(BOOL_ARRAY[2].read_text() + clear, "bool-array", str(BOOL_ARRAY[2]))
    with pytest.raises(DuplicateDefinitionError) as exc:
        merge_units(h, icc, cc2)
    assert "clear" in str(exc.value)


def test_merge_orphan_definition():
    unit = parse_source("int Ghost::run() { return 1; }", "o", "o.cc")
    with pytest.raises(OrphanDefinitionError):
        merge_units(unit)


def test_merge_reports_foreign_include():
    unit = parse_source('#include "options.h"\nint a = 1;\n', "m", "m.cc")
    merged = merge_units(unit)
    assert any(d.rule_id == "unresolved-include" for d in merged.diagnostics)
