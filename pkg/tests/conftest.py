"""Collects acceptance-criterion result lines and prints them after the run."""

_criterion_lines = []


def record_criterion(line):
    _criterion_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if not _criterion_lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_criterion_lines):
        terminalreporter.write_line(line)
