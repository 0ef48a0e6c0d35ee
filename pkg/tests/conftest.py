import pytest

from xyent.model import ModelParams


@pytest.fixture
def ising():
    return ModelParams(1.0, 1.0)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[n])
