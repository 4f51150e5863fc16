import sys
from pathlib import Path

import pytest

from feasbo import problems

ROOT = Path(__file__).resolve().parents[1]
ECHO = str(ROOT / "scripts" / "echo_evaluator.py")
GOLDEN = Path(__file__).resolve().parent / "golden"

# filled by tests/test_acceptance.py, printed once at the end of the session
ACCEPTANCE_LINES = []


def echo_command(*flags):
    return [sys.executable, ECHO, *flags]


@pytest.fixture(scope="session")
def rosen():
    return problems.rosenbrock_problem()


@pytest.fixture(scope="session")
def rastr():
    return problems.rastrigin_problem()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
