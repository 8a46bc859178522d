"""Per-criterion verdict lines for the acceptance suite."""

_verdicts = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion number")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args[0]))


def pytest_runtest_logreport(report):
    for key, k in report.user_properties:
        if key == "criterion" and (report.when == "call" or report.failed):
            _verdicts[k] = _verdicts.get(k, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_verdicts):
        terminalreporter.write_line(f"ACCEPTANCE criterion {k}: {'PASS' if _verdicts[k] else 'FAIL'}")
