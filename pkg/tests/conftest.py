import numpy as np
import pytest

from zndc.model import LinearSystem, PatternMatrix


def random_pattern(rng, n_rows, n_cols, density=None):
    density = rng.uniform(0.1, 0.5) if density is None else density
    mask = rng.random((n_rows, n_cols)) < density
    return PatternMatrix.from_mask(mask)


def random_system(rng, n, m, density=0.4, integer=True):
    """Sparse small-integer pair; uncontrollable more often than not."""
    a = rng.integers(-2, 3, size=(n, n)) * (rng.random((n, n)) < density)
    b = rng.integers(-2, 3, size=(n, m)) * (rng.random((n, m)) < density)
    if not integer:
        a = a * rng.uniform(0.5, 1.5, size=a.shape)
    return LinearSystem(a.astype(float), b.astype(float))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
