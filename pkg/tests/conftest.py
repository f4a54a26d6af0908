import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    """Record one acceptance line; the summary prints them all at the end."""
    def _rec(cid: str, ok: bool, detail: str, tol: str = "exact"):
        line = f"{cid:>4} {'PASS' if ok else 'FAIL'}  [tolerance: {tol}]  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _rec


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
