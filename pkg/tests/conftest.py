import pytest

from cigyro.core_dynamics import PhysicalParams
from cigyro.interferometry import sweep_phase_start

CI_GRID = [round(-0.48 + 0.04 * i, 12) for i in range(25)]


@pytest.fixture(scope="session")
def params():
    return PhysicalParams()


@pytest.fixture(scope="session")
def ci_sweep(params):
    """Default CI sweep over the 25-point phase-start grid (Omega = 0.03 rad/s)."""
    return sweep_phase_start(params, CI_GRID, kind="ci")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
