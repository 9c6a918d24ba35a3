import math

import pytest

from gfcomb import CombMedium, ControlSchedule, Grid, gaussian

# Results recorded by test_acceptance, echoed in the terminal summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def comb(zeta=4 / math.pi, T0=400e-9, M=9, **kw):
    return CombMedium.from_comb(M=M, d=0.56e-3, L0=1e-3, zeta_eff=zeta, T0=T0, **kw)


@pytest.fixture
def gfc_medium():
    return comb()


@pytest.fixture
def pulse():
    return gaussian(50e-9, dt=0.5e-9)


@pytest.fixture
def empty_schedule():
    return ControlSchedule(())


@pytest.fixture
def grid():
    return Grid(dt=0.5e-9, t_end=800e-9)
