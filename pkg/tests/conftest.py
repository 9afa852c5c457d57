"""Shared pytest wiring: echo the acceptance checklist after the run.

The acceptance tests record one verdict line each; printing them from a
terminal-summary hook keeps them visible no matter which capture mode the
run uses.
"""
from __future__ import annotations

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", None) if mod else None
    if lines:
        terminalreporter.section("acceptance checklist")
        for line in lines:
            terminalreporter.write_line(line)
