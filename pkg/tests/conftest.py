"""Collects outcomes of tests marked ``acceptance(k)`` and prints one line per criterion."""

import pytest

_RESULTS: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number = marker.args[0]
    entry = _RESULTS.setdefault(number, {"title": item.function.__doc__ or item.name,
                                         "passed": True, "duration": 0.0, "seen": False})
    if report.when == "call":
        entry["seen"] = True
        entry["duration"] += report.duration
    if report.failed or (report.when == "call" and report.skipped):
        entry["passed"] = False


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entry = _RESULTS[number]
        status = "PASS" if entry["passed"] and entry["seen"] else "FAIL"
        title = entry["title"].strip().splitlines()[0]
        tr.write_line(f"criterion {number:>2}: {status}  ({entry['duration']:6.1f} s)  {title}")
