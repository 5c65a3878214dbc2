from __future__ import annotations

import pytest

from support import have_toolchain


def pytest_collection_modifyitems(config, items):
    if have_toolchain():
        return
    skip = pytest.mark.skip(reason="gcc/g++/rustc not on PATH")
    for item in items:
        if "toolchain" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
