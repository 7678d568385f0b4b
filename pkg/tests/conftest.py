"""Shared pytest wiring: a pass/fail line per acceptance criterion."""

_RESULTS = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.split("::")[-1]
    if not name.startswith("test_criterion_"):
        return
    number = int(name.split("_")[2])
    label = " ".join(name.split("_")[3:])
    if report.when == "call":
        _RESULTS[number] = (label, report.outcome)
    elif report.when == "setup" and report.outcome != "passed":
        _RESULTS[number] = (label, report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        label, outcome = _RESULTS[number]
        word = {"passed": "PASS", "failed": "FAIL"}.get(outcome,
                                                        outcome.upper())
        terminalreporter.write_line(f"criterion {number:2d} ({label}): {word}")
