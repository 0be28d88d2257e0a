from __future__ import annotations

import pytest

_CRITERIA: dict[int, tuple[str, bool, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and rep.passed:
        return
    n, title = mark.args
    detail = getattr(item, "criterion_detail", "")
    ok = rep.passed and _CRITERIA.get(n, (title, True, ""))[1]
    _CRITERIA[n] = (title, ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok, detail = _CRITERIA[n]
        line = f"[{'PASS' if ok else 'FAIL'}] {n}. {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
