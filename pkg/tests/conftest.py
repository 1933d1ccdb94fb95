import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")
_outcomes: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    number, name = int(m.group(1)), m.group(2).replace("_", " ")
    previous = _outcomes.get(number, (name, "PASS"))[1]
    failed = report.failed or (report.when == "call" and report.skipped)
    _outcomes[number] = (name, "FAIL" if failed or previous == "FAIL" else "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number, (name, status) in sorted(_outcomes.items()):
        terminalreporter.write_line(f"criterion {number:2d}  {status}  {name}")
