import numpy as np
import pytest
from hypothesis import strategies as st


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@st.composite
def redraw_distributions(draw, max_d=64):
    """Valid q: q[0] = 1, weakly decreasing, positive."""
    d = draw(st.integers(1, max_d))
    tail = draw(st.lists(st.floats(1e-3, 1.0), min_size=d - 1, max_size=d - 1))
    return np.concatenate(([1.0], np.sort(tail)[::-1]))


@st.composite
def decreasing_profiles(draw, min_d=1, max_d=6):
    """Strictly positive decreasing nu of length d+1 ending in 0, plus a cost profile."""
    d = draw(st.integers(min_d, max_d))
    nu = np.sort(draw(st.lists(st.floats(0.01, 100.0), min_size=d, max_size=d)))[::-1]
    steps = np.array(draw(st.lists(st.floats(0.1, 10.0), min_size=d, max_size=d)))
    t = np.concatenate(([0.0], np.cumsum(steps)))
    return t, np.append(nu, 0.0)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
