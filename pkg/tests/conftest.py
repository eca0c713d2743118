import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import acceptance_log  # noqa: E402


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    name = report.nodeid.split("::")[-1]
    if "test_acceptance.py" in report.nodeid and name.startswith("test_criterion_"):
        acceptance_log.OUTCOMES[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    lines = acceptance_log.summary_lines()
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
