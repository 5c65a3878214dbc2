"""Random programs from a small construct grammar.

Every generated program is deterministic, terminates quickly and keeps its
integers small, so the source and target compilers agree on the output.
"""

from __future__ import annotations

import argparse
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class _Scope:
    ints: list[str] = field(default_factory=list)
    arrays: list[tuple[str, int]] = field(default_factory=list)
    consts: list[str] = field(default_factory=list)
    ro: list[str] = field(default_factory=list)  # loop variables, read only


class ProgramGen:
    def __init__(self, seed: int, cpp: bool | None = None):
        self.rng = random.Random(seed)
        self.cpp = self.rng.random() < 0.5 if cpp is None else cpp
        self.counter = 0
        self.globals_rw: list[str] = []
        self.funcs: list[tuple[str, int]] = []  # (name, arity) returning int
        self.structs: list[tuple[str, list[str]]] = []
        self.depth = 0
        self.in_main = False

    def fresh(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    # ------------------------------------------------------ expressions

    def atom(self, sc: _Scope) -> str:
        r = self.rng.random()
        names = sc.ints + sc.consts + sc.ro
        if names and r < 0.55:
            return self.rng.choice(names)
        if sc.arrays and r < 0.65:
            a, n = self.rng.choice(sc.arrays)
            return f"{a}[{self.rng.randrange(n)}]"
        if self.globals_rw and r < 0.72:
            return self.rng.choice(self.globals_rw)
        return str(self.rng.randrange(0, 20))

    def expr(self, sc: _Scope, depth: int = 0) -> str:
        r = self.rng.random()
        if depth > 2 or r < 0.3:
            return self.atom(sc)
        if r < 0.7:
            op = self.rng.choice(["+", "-", "*", "+", "-"])
            return f"({self.expr(sc, depth + 1)} {op} {self.expr(sc, depth + 1)})"
        if r < 0.8:
            return f"({self.expr(sc, depth + 1)} % {self.rng.randrange(2, 9)})"
        if r < 0.88:
            return f"({self.cond(sc, depth + 1)} ? {self.expr(sc, depth + 1)} : {self.expr(sc, depth + 1)})"
        if self.funcs and r < 0.96:
            name, arity = self.rng.choice(self.funcs)
            args = ", ".join(f"({self.atom(sc)} % 5)" for _ in range(arity))
            return f"{name}({args})"
        return f"({self.expr(sc, depth + 1)} / {self.rng.randrange(1, 6)})"

    def cond(self, sc: _Scope, depth: int = 0) -> str:
        op = self.rng.choice(["<", ">", "<=", ">=", "==", "!="])
        c = f"{self.expr(sc, depth + 1)} {op} {self.expr(sc, depth + 1)}"
        if self.rng.random() < 0.2:
            j = self.rng.choice(["&&", "||"])
            c = f"({c}) {j} ({self.atom(sc)} > {self.rng.randrange(10)})"
        return c

    def clamp(self, name: str) -> str:
        return f"{name} = {name} % 1000;"

    # ------------------------------------------------------- statements

    def stmts(self, sc: _Scope, n: int, ind: str, loop: bool = False) -> list[str]:
        out = []
        for _ in range(n):
            out += self.stmt(sc, ind, loop)
        return out

    def stmt(self, sc: _Scope, ind: str, loop: bool) -> list[str]:
        r = self.rng.random()
        self.depth += 1
        try:
            if self.depth > 3:
                r = r * 0.3
            if r < 0.15 or not sc.ints:
                v = self.fresh("v")
                line = f"{ind}int {v} = {self.expr(sc)};"
                sc.ints.append(v)
                return [line]
            if r < 0.3:
                v = self.rng.choice(sc.ints)
                op = self.rng.choice(["=", "+=", "-=", "*="])
                return [f"{ind}{v} {op} {self.expr(sc)};", f"{ind}{self.clamp(v)}"]
            if r < 0.36:
                v = self.rng.choice(sc.ints)
                return [f"{ind}{v}{self.rng.choice(['++', '--'])};"]
            if r < 0.42 and self.globals_rw and self.in_main:
                # helpers only read globals, so call order inside one expression never matters
                g = self.rng.choice(self.globals_rw)
                return [f"{ind}{g} = ({g} + {self.expr(sc)}) % 1000;"]
            if r < 0.5:
                return [f"{ind}{self.print_int(self.expr(sc))}"]
            if r < 0.6:
                out = [f"{ind}if ({self.cond(sc)}) {{"]
                out += self.stmts(_copy(sc), self.rng.randrange(1, 3), ind + "    ", loop)
                if self.rng.random() < 0.5:
                    out.append(f"{ind}}} else {{")
                    out += self.stmts(_copy(sc), self.rng.randrange(1, 3), ind + "    ", loop)
                out.append(f"{ind}}}")
                return out
            if r < 0.7:
                i = self.fresh("i")
                inner = _copy(sc)
                inner.ro.append(i)
                out = [f"{ind}for (int {i} = 0; {i} < {self.rng.randrange(1, 6)}; {i}++) {{"]
                if self.rng.random() < 0.3:
                    out.append(f"{ind}    if ({i} == {self.rng.randrange(4)}) continue;")
                out += self.stmts(inner, self.rng.randrange(1, 3), ind + "    ", True)
                if self.rng.random() < 0.2:
                    out.append(f"{ind}    if ({i} > {self.rng.randrange(2, 5)}) break;")
                out.append(f"{ind}}}")
                return out
            if r < 0.77:
                k = self.fresh("k")
                out = [f"{ind}int {k} = {self.rng.randrange(2, 6)};", f"{ind}while ({k} > 0) {{"]
                inner = _copy(sc)
                out.append(f"{ind}    {k}--;")
                out += self.stmts(inner, self.rng.randrange(1, 3), ind + "    ", True)
                out.append(f"{ind}}}")
                sc.ints.append(k)
                return out
            if r < 0.82:
                k = self.fresh("d")
                out = [f"{ind}int {k} = 0;", f"{ind}do {{"]
                out += self.stmts(_copy(sc), 1, ind + "    ", True)
                out += [f"{ind}    {k}++;", f"{ind}}} while ({k} < {self.rng.randrange(1, 4)});"]
                sc.ints.append(k)
                return out
            if r < 0.88:
                out = [f"{ind}switch ({self.expr(sc)} % 4) {{"]
                for c in sorted(self.rng.sample(range(-3, 4), self.rng.randrange(1, 4))):
                    out.append(f"{ind}case {c}: {{")
                    out += self.stmts(_copy(sc), 1, ind + "    ", loop)
                    out.append(f"{ind}    break;")
                    out.append(f"{ind}}}")
                out += [f"{ind}default:", f"{ind}    {self.print_int(str(self.rng.randrange(9)))}", f"{ind}    break;", f"{ind}}}"]
                return out
            if r < 0.9:
                a = self.fresh("arr")
                n = self.rng.randrange(2, 6)
                init = ", ".join(str(self.rng.randrange(10)) for _ in range(n))
                i = self.fresh("j")
                s = self.fresh("s")
                out = [f"{ind}int {a}[{n}] = {{{init}}};", f"{ind}int {s} = 0;",
                       f"{ind}for (int {i} = 0; {i} < {n}; {i}++) {{",
                       f"{ind}    {a}[{i}] = {a}[{i}] + {i};", f"{ind}    {s} += {a}[{i}];", f"{ind}}}",
                       f"{ind}{self.print_int(s)}"]
                sc.arrays.append((a, n))
                sc.ints.append(s)
                return out
            extra = self.extra(sc, ind)
            if extra:
                return extra
            if self.structs:
                name, fields = self.rng.choice(self.structs)
                v = self.fresh("p")
                kw = "" if self.cpp else "struct "
                out = [f"{ind}{kw}{name} {v};"]
                for f in fields:
                    out.append(f"{ind}{v}.{f} = {self.expr(sc)};")
                out.append(f"{ind}{self.print_int(f'sum_{name}(&{v})')}")
                return out
            return [f"{ind}{self.print_int(self.expr(sc))}"]
        finally:
            self.depth -= 1

    def extra(self, sc: _Scope, ind: str) -> list[str]:
        kind = self.rng.choice(["ptr", "heap", "list", "str", "double", "none"])
        if kind == "ptr":
            v = self.rng.choice(sc.ints)
            return [f"{ind}add_to(&{v}, {self.expr(sc)});", f"{ind}{self.clamp(v)}"]
        if kind == "heap":
            h, i, t = self.fresh("h"), self.fresh("q"), self.fresh("t")
            n = self.rng.randrange(1, 6)
            alloc = f"new int[{n}]" if self.cpp else f"(int *)malloc({n} * sizeof(int))"
            free = f"delete[] {h};" if self.cpp else f"free({h});"
            mul = self.atom(sc)
            out = [f"{ind}int *{h} = {alloc};", f"{ind}int {t} = 0;",
                   f"{ind}for (int {i} = 0; {i} < {n}; {i}++) {{",
                   f"{ind}    {h}[{i}] = {i} * ({mul} % 10);", f"{ind}    {t} += {h}[{i}];", f"{ind}}}",
                   f"{ind}{self.print_int(t)}", f"{ind}{free}"]
            sc.ints.append(t)
            return out
        if kind == "list":
            kw = "" if self.cpp else "struct "
            names = [self.fresh("n") for _ in range(self.rng.randrange(1, 4))]
            out = []
            for nm in names:
                alloc = "new Node" if self.cpp else "(struct Node *)malloc(sizeof(struct Node))"
                out += [f"{ind}{kw}Node *{nm} = {alloc};", f"{ind}{nm}->val = {self.expr(sc)};",
                        f"{ind}{nm}->next = NULL;"]
            for a, b in zip(names, names[1:]):
                out.append(f"{ind}{a}->next = {b};")
            out.append(f"{ind}{self.print_int(f'list_sum({names[0]})')}")
            return out
        if kind == "str":
            tag = self.rng.choice(["tag", "x=", "value", "a b"])
            return [f'{ind}printf("%s %d\\n", "{tag}", {self.expr(sc)});']
        if kind == "double":
            x = self.fresh("x")
            return [f"{ind}double {x} = {self.expr(sc)} / 4.0;", f'{ind}printf("%.2f\\n", {x});']
        return []

    def print_int(self, e: str) -> str:
        if self.cpp and self.rng.random() < 0.5:
            return f"std::cout << {e} << std::endl;"
        return f'printf("%d\\n", {e});'

    # ------------------------------------------------------------ items

    def program(self) -> str:
        lines = ["#include <stdio.h>"] if not self.cpp else ["#include <cstdio>", "#include <iostream>"]
        lines.append("")
        top = _Scope()
        if not self.cpp:
            lines.insert(1, "#include <stdlib.h>")
        for _ in range(self.rng.randrange(0, 3)):
            c = self.fresh("K")
            lines.append(f"const int {c} = {self.rng.randrange(1, 10)};")
            top.consts.append(c)
        for _ in range(self.rng.randrange(0, 2)):
            g = self.fresh("g")
            lines.append(f"int {g} = {self.rng.randrange(5)};")
            self.globals_rw.append(g)
        lines.append("")
        for _ in range(self.rng.randrange(0, 2)):
            name = self.fresh("S")
            fields = [self.fresh("f") for _ in range(self.rng.randrange(1, 4))]
            lines.append(f"struct {name} {{")
            lines += [f"    int {f};" for f in fields]
            lines += ["};", ""]
            kw = "" if self.cpp else "struct "
            total = " + ".join(f"s->{f}" for f in fields)
            lines += [f"int sum_{name}({kw}{name} *s) {{", f"    return {total};", "}", ""]
            self.structs.append((name, fields))
        kw = "" if self.cpp else "struct "
        lines += ["void add_to(int *t, int by) {", "    *t = *t + by;", "}", ""]
        lines += ["struct Node {", "    int val;", f"    {'' if self.cpp else 'struct '}Node *next;", "};", ""]
        lines += [f"int list_sum({kw}Node *n) {{", "    int s = 0;", "    while (n != NULL) {", "        s += n->val;",
                  "        n = n->next;", "    }", "    return s;", "}", ""]
        if self.cpp and self.rng.random() < 0.5:
            lines += self.counter_class()
        if self.rng.random() < 0.4:
            lines += self.recursive()
        for _ in range(self.rng.randrange(1, 3)):
            name = self.fresh("fn")
            arity = self.rng.randrange(1, 3)
            params = [self.fresh("a") for _ in range(arity)]
            sc = _Scope(ints=list(params), consts=list(top.consts))
            body = self.stmts(sc, self.rng.randrange(1, 4), "    ")
            ret = f"    return ({self.expr(sc)}) % 100;"
            lines += [f"int {name}({', '.join('int ' + p for p in params)}) {{"] + body + [ret, "}", ""]
            self.funcs.append((name, arity))
        sc = _Scope(consts=list(top.consts))
        self.in_main = True
        lines.append("int main() {")
        lines += self.stmts(sc, self.rng.randrange(3, 8), "    ")
        for g in self.globals_rw:
            lines.append(f"    {self.print_int(g)}")
        if getattr(self, "has_class", False):
            lines += ["    Counter c(3);", "    c.bump(4);", "    c.bump(-1);", f"    {self.print_int('c.get()')}"]
        lines += ["    return 0;", "}", ""]
        return "\n".join(lines)

    def counter_class(self) -> list[str]:
        self.has_class = True
        return [
            "class Counter {", "    int total;", "public:", "    Counter(int start) { total = start; }",
            "    void bump(int by) { total += by; }", "    int get() { return total; }", "};", "",
        ]

    def recursive(self) -> list[str]:
        name = self.fresh("rec")
        self.funcs.append((name, 1))
        return [f"int {name}(int n) {{", "    if (n <= 1)", "        return 1;",
                f"    return n + {name}(n - 1);", "}", ""]


def _copy(sc: _Scope) -> _Scope:
    return _Scope(list(sc.ints), list(sc.arrays), list(sc.consts), list(sc.ro))


def generate(seed: int, cpp: bool | None = None) -> tuple[str, str]:
    """``(file name, source)`` for ``seed``."""
    gen = ProgramGen(seed, cpp)
    text = gen.program()
    return (f"fuzz{seed:04d}.cpp" if gen.cpp else f"fuzz{seed:04d}.c"), text


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="cpp2rust-fuzz", description="Write random programs from the construct grammar.")
    ap.add_argument("out_dir")
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for s in range(args.seed, args.seed + args.count):
        name, text = generate(s)
        (out / name).write_text(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
