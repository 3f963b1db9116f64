"""Shared fixtures and the acceptance-verdict summary hook.

test_acceptance.py registers one PASS/FAIL line per criterion through
``record_verdict``; the hook below prints them after the run so the verdicts
survive pytest's output capture.
"""

from __future__ import annotations

import pytest

from resplan.config import default_profile
from resplan.graph import build_resnet50

_VERDICTS: list[str] = []


def record_verdict(ok: bool, label: str, detail: str = "") -> None:
    tag = "PASS" if ok else "FAIL"
    line = f"{tag} {label}" + (f": {detail}" if detail else "")
    _VERDICTS.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in _VERDICTS:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def resnet50():
    return build_resnet50()


@pytest.fixture(scope="session")
def shipped_profile():
    return default_profile()
