"""Shared pytest hooks.

The acceptance tests register one verdict line each; printing them from a
terminal-summary hook keeps them visible under pytest's default capture.
"""

VERDICTS = []


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in VERDICTS:
            terminalreporter.write_line(line)
