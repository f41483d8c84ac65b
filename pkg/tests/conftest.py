import pytest

from risanchor.channel import PilotGrid
from risanchor.geometry import MotionModel, RisSegment


@pytest.fixture
def motion():
    return MotionModel(10.0)


@pytest.fixture
def desk_pilots():
    return PilotGrid.uniform(24.5e9, 25.5e9, 51, 0.025, 25)


@pytest.fixture
def horizontal_ris():
    """20-pixel surface on y = -3, UE side above."""
    return RisSegment.centered((0.0, -3.0), 0.0, 20, 0.006, +1)


_CRITERIA = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_CRITERIA] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the summary is printed at the end of the run."""
    lines = request.config.stash[_CRITERIA]

    def record(label, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        lines.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
