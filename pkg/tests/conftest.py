import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import FIVE_G, FIVE_X0  # noqa: E402

from hman import AgentRoster, Hman, validate  # noqa: E402


@pytest.fixture
def five_g():
    return validate(FIVE_G)


@pytest.fixture
def five_model(five_g):
    return Hman(five_g, AgentRoster.from_blocks(3, 1, 1))


@pytest.fixture
def five_x0():
    return list(FIVE_X0)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
