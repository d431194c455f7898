import re

_results: dict[str, list[str]] = {}
_titles: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(tag, title): acceptance criterion this test covers")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            item.user_properties.append(("criterion", mark.args[0]))
            _titles[mark.args[0]] = mark.args[1]


def pytest_runtest_logreport(report):
    tag = dict(report.user_properties).get("criterion")
    if tag is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _results.setdefault(tag, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for tag in sorted(_results, key=lambda t: int(re.sub(r"\D", "", t) or 0)):
        ok = all(o == "passed" for o in _results[tag])
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {tag}: {_titles.get(tag, '')}")
