import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from flagdyn import base_dynamics as bd
from flagdyn.cocycle_engine import CocycleSystem, ConstantField, SymbolTable

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

BERNOULLI = np.array([[[2.0, 1.0], [0.0, 0.5]], [[0.5, 0.0], [1.0, 2.0]]])
DIAGONAL_PAIR = np.array([np.diag([4.0, 0.25]), np.diag([2.0, 0.5])])
ROTATION_ANGLE = float(np.sqrt(2) - 1)


def shift_system(mats, weights=None, seed=1):
    mats = np.asarray(mats, dtype=float)
    w = weights or tuple([1.0 / len(mats)] * len(mats))
    return CocycleSystem(bd.FullShift(w, seed=seed), SymbolTable(mats))


def rotation_system(matrix, angle=ROTATION_ANGLE):
    return CocycleSystem(bd.IrrationalRotation(angle), ConstantField(np.asarray(matrix, dtype=float)))


def random_invertible(rng, d, cond=1e4):
    while True:
        g = rng.standard_normal((d, d))
        if np.linalg.cond(g) < cond:
            return g


@pytest.fixture
def bernoulli():
    return shift_system(BERNOULLI)


@pytest.fixture
def diagonal_pair():
    return shift_system(DIAGONAL_PAIR)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
