from __future__ import annotations

from importlib import resources

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("ringforge", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ringforge")

_CRITERIA: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    _CRITERIA[number] = line
    print(line)


@pytest.fixture
def criterion():
    return record_criterion


def problem_path(name: str) -> str:
    return str(resources.files("ringforge") / "problems" / name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[n])
