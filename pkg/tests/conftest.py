"""Per-criterion PASS/FAIL summary for the acceptance suite.

Tests tagged ``@pytest.mark.criterion(n)`` are grouped by ``n``; a criterion
passes only when every test tagged with it passes. Tests attach a one-line
detail with ``record_property("detail", ...)``.
"""

from collections import defaultdict

import pytest

_outcomes: dict[int, list[tuple[bool, str]]] = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        details = [v for k, v in item.user_properties if k == "detail"]
        text = "; ".join(details) or item.name
        if report.failed:
            text = f"{item.name}: {text}"
        _outcomes[marker.args[0]].append((report.passed, text))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        results = _outcomes[n]
        ok = all(passed for passed, _ in results)
        shown = [t for passed, t in results if not passed] if not ok else [t for _, t in results]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {' | '.join(shown)}")
