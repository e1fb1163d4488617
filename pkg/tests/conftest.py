import numpy as np
import pytest

from pnask.channel import ChannelModel

# (criterion, verdict, detail) lines collected by the acceptance module
ACCEPTANCE_LINES: list[tuple[str, str, str]] = []


def record(criterion: str, ok: bool, detail: str = "") -> None:
    line = (criterion, "PASS" if ok else "FAIL", detail)
    ACCEPTANCE_LINES.append(line)
    print(f"[{line[1]}] {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{verdict}  {name}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def rayleigh():
    return ChannelModel.rayleigh(1.0)


@pytest.fixture
def awgn():
    return ChannelModel.awgn()
