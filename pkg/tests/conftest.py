import numpy as np
import pytest

from dclip.funcrep import MaxAffine, PointSet


@pytest.fixture
def abs1():
    return MaxAffine.from_pieces([([1.0], 0.0), ([-1.0], 0.0)])


@pytest.fixture
def zero1():
    return MaxAffine.zero(1)


@pytest.fixture
def grid5():
    return PointSet(1, [[-2.0], [-1.0], [0.0], [1.0], [2.0]])


def pytest_terminal_summary(terminalreporter):
    lines = getattr(terminalreporter.config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
