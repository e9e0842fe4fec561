from __future__ import annotations

import os
import sys

import pytest

HERE = os.path.dirname(__file__)
sys.path.insert(0, HERE)

from reacheq.game import load_game  # noqa: E402

DATA = os.path.join(HERE, "data")

# one line per acceptance criterion, printed in the terminal summary
CRITERIA: dict[int, tuple[bool, str]] = {}


def data_path(name: str) -> str:
    return os.path.join(DATA, name)


@pytest.fixture(scope="session")
def ex1():
    return load_game(data_path("ex1.game"))


@pytest.fixture(scope="session")
def ex0():
    return load_game(data_path("ex0.game"))


@pytest.fixture(scope="session")
def three():
    return load_game(data_path("three.game"))


@pytest.fixture
def criterion():
    def record(number: int, ok: bool, detail: str) -> None:
        CRITERIA[number] = (ok, detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        ok, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
