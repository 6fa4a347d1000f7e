import pytest

_criteria: dict[str, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if item.module.__name__ != "test_acceptance" or not item.function.__doc__:
        return
    label = item.function.__doc__.strip().splitlines()[0]
    if report.when == "call" or report.failed:
        prev = _criteria.get(item.nodeid, ("PASS", label))[0]
        status = "FAIL" if report.failed or prev == "FAIL" else "PASS"
        _criteria[item.nodeid] = (status, label)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for status, label in sorted(_criteria.values(), key=lambda t: t[1]):
        terminalreporter.write_line(f"{status}  {label}")
