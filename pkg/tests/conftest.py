import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

_outcomes = {}
_titles = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(key, title): acceptance criterion covered by a test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            key, title = mark.args
            _titles[key] = title
            item.user_properties.append(("criterion", key))


def pytest_runtest_logreport(report):
    key = dict(report.user_properties).get("criterion")
    if key is None:
        return
    if report.when == "call" or report.failed:
        _outcomes.setdefault(key, []).append((report.nodeid.split("::")[-1], report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_outcomes):
        results = _outcomes[key]
        ok = all(passed for _, passed in results)
        failed = [name for name, passed in results if not passed]
        line = f"{key} {'PASS' if ok else 'FAIL'}  {_titles[key]}"
        if failed:
            line += "  (failed: " + ", ".join(failed) + ")"
        tr.write_line(line)
