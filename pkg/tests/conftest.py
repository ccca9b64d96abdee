import numpy as np
import pytest
from hypothesis import strategies as st

from infodyn.matkernel import random_state


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def states(min_dim=2, max_dim=5, faithful=True):
    """Hypothesis strategy drawing random density matrices through a seed."""
    return st.tuples(st.integers(min_dim, max_dim), st.integers(0, 2**32 - 1)).map(
        lambda a: random_state(a[0], a[1], faithful=faithful)
    )


def state_pairs(min_dim=2, max_dim=5):
    return st.tuples(st.integers(min_dim, max_dim), st.integers(0, 2**32 - 1)).map(
        lambda a: (random_state(a[0], a[1]), random_state(a[0], a[1] + 1))
    )


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
