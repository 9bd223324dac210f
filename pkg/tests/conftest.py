import pytest

from oracles import sent


@pytest.fixture
def thanks():
    return sent(["aapka", "bohot", "bohot", "shukriya"])


@pytest.fixture
def example2():
    return sent(["vah", "neela", "nahi", "neela", "neela", "phool", "hai"])


_acceptance_lines = []


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.skipped):
        return
    for line in report.capstdout.splitlines():
        if line.startswith("ACCEPTANCE "):
            _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
