from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpp2rust.errors import EmissionError
from cpp2rust.target import TargetUnit, emit_unit, validate_target
from cpp2rust.target import model as T
from cpp2rust.target.emitter import FENCE_CLOSE, HEADER
from cpp2rust.target.validate import strip_non_code

from support import CORPUS, transpile

TEMPLATE = "template <class T>\nT twice(T v) {\n    return v + v;\n}"


def record_c():
    return T.RecordItem("C", [T.RecordField(n, "i32", public=True) for n in "abc"])


def test_record_rendering():
    text = emit_unit(TargetUnit("c", [record_c()]))
    assert text == f"{HEADER}\n\npub struct C {{\n    pub a: i32,\n    pub b: i32,\n    pub c: i32,\n}}\n"


def test_empty_unit_is_empty_text():
    assert emit_unit(TargetUnit("e")) == ""


def test_unconverted_block_fence():
    text = emit_unit(TargetUnit("t", [T.UnconvertedBlock("template", TEMPLATE)]))
    lines = text.split("\n")
    start = lines.index("// [UNCONVERTED: template]")
    assert lines[start + 1:start + 5] == ["// template <class T>", "// T twice(T v) {", "//     return v + v;", "// }"]
    assert lines[start + 5] == FENCE_CLOSE


def test_impl_without_record_is_error():
    fn = T.FnItem("get", [], "i32", [T.Tail("0")], public=True, receiver="&self")
    with pytest.raises(EmissionError):
        emit_unit(TargetUnit("x", [T.ImplItem("Missing", [fn])]))


def test_items_separated_by_one_blank_line():
    fn = T.FnItem("f", [T.Param("a", "i32")], "i32", [T.Tail("a")], public=True)
    text = emit_unit(TargetUnit("u", [T.ConstItem("K", "i32", "1"), record_c(), fn]))
    assert "\n\n\n" not in text
    assert "pub fn f(a: i32) -> i32 {\n    a\n}\n" in text
    assert text.endswith("\n")


def test_impl_methods_in_order():
    m1 = T.FnItem("method1", [T.Param("v", "i32")], None, [T.ExprStmt("self.a = v")], public=True, receiver="&mut self")
    m2 = T.FnItem("method2", [], "i32", [T.Tail("self.a")], public=True, receiver="&self")
    text = emit_unit(TargetUnit("c", [record_c(), T.ImplItem("C", [m1, m2])]))
    assert text.index("fn method1(&mut self, v: i32)") < text.index("fn method2(&self) -> i32")


def test_statement_shapes():
    body = [
        T.Let("x", "i32", "0", mutable=True),
        T.Loop([T.ExprStmt("x += 1"), T.If("!(x < 3)", [T.Break()])]),
        T.ForRange("i", "0", "n", [T.Continue()]),
        T.If("a", [T.ExprStmt("f()")], [T.If("b", [T.ExprStmt("g()")], [T.ExprStmt("h()")])]),
        T.Match("x", [T.MatchArm(["1", "2"], [T.ExprStmt("f()")]), T.MatchArm(None, [])]),
        T.Return("x"),
    ]
    text = emit_unit(TargetUnit("s", [T.FnItem("s", [T.Param("n", "i32")], "i32", body)]))
    for piece in ["let mut x: i32 = 0;", "loop {", "for i in 0..n {", "} else if b {", "1 | 2 => {", "_ => {}",
                  "return x;"]:
        assert piece in text


def test_emission_is_deterministic():
    src = (CORPUS / "LinkedList.c").read_text()
    assert transpile(src, "LinkedList", "LinkedList.c")[0] == transpile(src, "LinkedList", "LinkedList.c")[0]


def test_the_unsafe_block_node_renders():
    text = emit_unit(TargetUnit("u", [T.FnItem("f", [], None, [T.UnsafeBlock([T.ExprStmt("G += 1")])])]))
    assert "unsafe {" in text
    assert len(validate_target(text)) == 1


# ------------------------------------------------------------ validator


def test_fibonacci_output_is_clean():
    text, _, _ = transpile((CORPUS / "Fibonacci.c").read_text(), "Fibonacci", "Fibonacci.c")
    assert text and validate_target(text) == []


def test_unsafe_in_code_is_reported_with_line():
    (v,) = validate_target("fn f() {\n    unsafe { g(); }\n}\n")
    assert v.line == 2 and v.token == "unsafe"


def test_raw_pointer_tokens():
    text = "fn f(p: *mut u32, q: * const u8) {}\n"
    assert [v.token for v in validate_target(text)] == ["*mut", "*const"]


@pytest.mark.parametrize("text", [
    "// [UNCONVERTED: template]\n// unsafe { x }\n// [END UNCONVERTED]\n",
    'fn f() { println!("unsafe *mut"); }\n',
    "/* unsafe */ fn f() {}\n",
    "fn unsafe_name() {}\n",
    "let c = '*'; let m = c as u8;\nfn f() {}\n",
    'let s = r#"unsafe"#;\n',
])
def test_non_code_is_exempt(text):
    assert validate_target(text) == []


def test_safe_mode_off_reports_nothing():
    assert validate_target("unsafe { }", safe_mode=False) == []


def _balanced(code: str) -> bool:
    pairs, stack = {")": "(", "]": "[", "}": "{"}, []
    for ch in code:
        if ch in "([{":
            stack.append(ch)
        elif ch in pairs:
            if not stack or stack.pop() != pairs[ch]:
                return False
    return not stack


@pytest.mark.parametrize("name", ["Fibonacci.c", "LinkedList.c", "Catalan.cpp", "Constructors.cpp"])
def test_corpus_output_is_balanced(name):
    text, _, _ = transpile((CORPUS / name).read_text(), name.split(".")[0], name)
    assert _balanced(strip_non_code(text))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.text(alphabet="abc {}()/*\n\"';", max_size=12), max_size=6))
def test_strip_keeps_line_structure(chunks):
    text = "".join(chunks)
    try:
        stripped = strip_non_code(text)
    except Exception as exc:  # pragma: no cover - failure report
        pytest.fail(repr(exc))
    assert stripped.count("\n") == text.count("\n")
