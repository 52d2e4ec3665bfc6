"""Shared pytest hooks: per-criterion summary lines for the acceptance tests."""

_criterion_results = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    for name, value in report.user_properties:
        if name == "criterion":
            number, text = value
            _criterion_results.append((number, text, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _criterion_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number, text, passed in sorted(_criterion_results):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status} criterion {number}: {text}")
