from __future__ import annotations

import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")
_outcomes: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    k = int(m.group(1))
    failed = report.failed or (report.when == "call" and report.skipped)
    if failed or k not in _outcomes:
        prev = _outcomes.get(k, ("PASS", ""))[0]
        status = "FAIL" if failed or prev == "FAIL" else "PASS"
        _outcomes[k] = (status, m.group(2))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_outcomes):
        status, name = _outcomes[k]
        terminalreporter.write_line(f"criterion {k:2d} {status}  {name.replace('_', ' ')}")
