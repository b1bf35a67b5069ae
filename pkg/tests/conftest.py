_outcomes: dict[str, list[bool]] = {}
_labels: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion this test decides")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            _labels[item.nodeid] = mark.args[0]
            _outcomes.setdefault(mark.args[0], [])


def pytest_runtest_logreport(report):
    label = _labels.get(report.nodeid)
    if label is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes[label].append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for label, results in _outcomes.items():
        ok = bool(results) and all(results)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}")
