import math

import numpy as np
import pytest

from leoharvest.channel import LinkBudget, db_to_linear, dbm_to_watts, noise_power_from_density
from leoharvest.constellation import MotionParams
from leoharvest.geometry import OrbitGeometry

KM = 1000.0
R_E = 6371 * KM


def geometry(altitude_km, gamma_km, r_e=R_E):
    return OrbitGeometry.from_altitude(r_e, altitude_km * KM, gamma_km * KM)


def link_budget(g_db=20.0, alpha=2.0):
    return LinkBudget(p=dbm_to_watts(30.0), g=db_to_linear(g_db), alpha=alpha,
                      noise_power=noise_power_from_density(-174.0, 20e6), bandwidth=20e6)


@pytest.fixture
def default_geom():
    return geometry(600, 900)


@pytest.fixture
def sparse_geom():
    return geometry(700, 750)


@pytest.fixture
def link():
    return link_budget()


@pytest.fixture
def motion(default_geom):
    return MotionParams.kepler(default_geom)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


HALF_PI = 0.5 * math.pi


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
