import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rigcert import corpus  # noqa: E402

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def record(criterion: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE[criterion] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda s: int(s.split(".")[0])):
        passed, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name}  {detail}")


@pytest.fixture(scope="session")
def entries():
    return {e.name: e for e in corpus.canonical_entries()}


@pytest.fixture
def triangle(entries):
    return entries["generic_triangle"].framework


@pytest.fixture
def brace(entries):
    return entries["collinear_brace"].framework


@pytest.fixture
def double(entries):
    return entries["double_collinear"].framework


@pytest.fixture
def hyper(entries):
    return entries["hyperstatic_brace"].framework
