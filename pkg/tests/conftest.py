"""Shared pytest plumbing.

The acceptance tests register one human-readable PASS/FAIL line per criterion
in ACCEPTANCE_LINES; the terminal-summary hook prints them after the run so
the verdicts are visible regardless of output capture.
"""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
