from __future__ import annotations

import pytest
from hypothesis import settings

settings.register_profile("lab", max_examples=40, deadline=None, derandomize=True)
settings.load_profile("lab")

# criterion number -> list of (verdict, passed, seconds); filled by test_acceptance
ACCEPTANCE_LOG: dict[int, list[tuple[str, bool, float]]] = {}


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LOG


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LOG):
        for verdict, passed, seconds in ACCEPTANCE_LOG[number]:
            terminalreporter.write_line(
                f"criterion {number:2d} {verdict:<20s} {'PASS' if passed else 'FAIL'}  ({seconds:.2f} s)"
            )
