import numpy as np
import pytest

from ansflow.data import gen_random_bandlimited
from ansflow.spectral import Grid


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def g16():
    return Grid.cube(16)


@pytest.fixture(scope="session")
def g32():
    return Grid.cube(32)


@pytest.fixture(scope="session")
def random_u32(g32):
    return gen_random_bandlimited(7, g32, amplitude=0.2)


_VERDICTS: list = []


@pytest.fixture(scope="session")
def verdict():
    """Record one PASS/FAIL line per acceptance criterion; returns the pass flag."""
    def record(number, title, ok, measured):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}: {measured}"
        _VERDICTS.append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_VERDICTS, key=lambda x: x[0]):
        terminalreporter.write_line(line)
