import sys
from pathlib import Path

import pytest

from swa_sim.game import GameConfig

AGENTS = Path(__file__).parent / "agents"


def agent_cmd(name, *args):
    return [sys.executable, str(AGENTS / name), *map(str, args)]


@pytest.fixture
def cfg():
    return GameConfig(n=5, C=20.0, beta=1.6, x_max=8.0, T=20)


@pytest.fixture
def cfg3():
    return GameConfig(n=5, C=20.0, beta=3.0, x_max=8.0, T=20)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
