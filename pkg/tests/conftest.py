"""Shared pytest hooks: replay the acceptance checklist after the run."""

import sys


def pytest_terminal_summary(terminalreporter):
    for name in ("test_acceptance", "tests.test_acceptance"):
        module = sys.modules.get(name)
        if module is not None and getattr(module, "CHECKLIST", None):
            terminalreporter.section("acceptance checklist")
            for line in module.CHECKLIST:
                terminalreporter.write_line(line)
            break
