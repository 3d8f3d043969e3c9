import numpy as np
import pytest

from funbias.curves import CurveProcessParams, Grid, generate_sample


@pytest.fixture
def grid():
    return Grid()


@pytest.fixture
def small_sample():
    return generate_sample(CurveProcessParams(seed=123), 60)


def random_sample(rng: np.random.Generator, n: int, grid: Grid = Grid(-1, 1, 41)):
    """Sample from the curve process with a seed drawn from ``rng``."""
    seed = int(rng.integers(0, 2**63))
    return generate_sample(CurveProcessParams(seed=seed), n, grid)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
