import pytest

from polyseries.enumeration import enumerate_staircase

# filled by test_acceptance.py, printed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def catalan_series():
    """c_0 .. c_40 as a dense list."""
    return [0] + enumerate_staircase(40).coeffs


@pytest.fixture
def toy_odes():
    from polyseries.ode import LinearODE
    return {
        "exp": LinearODE.from_lists([[-1], [1]]),                 # F' - F
        "geometric": LinearODE.from_lists([[-1], [1, -1]]),       # (1-x)F' - F
        "central": LinearODE.from_lists([[-2], [1, -4]]),         # (1-4x)F' - 2F
    }
