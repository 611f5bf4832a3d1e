import math

import pytest

from n2s.dynamics import Potential
from n2s.grid import Grid1D
from n2s.schrodinger import build_hamiltonian

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def harmonic_grid():
    return Grid1D.centered(10.0, 2000)


@pytest.fixture(scope="session")
def harmonic_H(harmonic_grid):
    return build_hamiltonian(harmonic_grid, Potential.harmonic(1.0))


@pytest.fixture(scope="session")
def coherent_sigma():
    return 1.0 / math.sqrt(2.0)
