import pytest

from kirchsolve import Grid, default_spec, continuation_sweep

DEFAULT_SCHEDULE = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5]

_ACCEPTANCE_LINES = []


@pytest.fixture
def spec():
    return default_spec()


@pytest.fixture
def grid400():
    return Grid(400)


@pytest.fixture(scope="session")
def default_sweep():
    """Continuation over the five-point schedule on N = 400 (shared; ~0.1 s)."""
    return continuation_sweep(default_spec(), DEFAULT_SCHEDULE, Grid(400))


@pytest.fixture
def acceptance_log():
    """Record one line per acceptance criterion; printed in the terminal summary."""
    def log(criterion, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return log


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
