import sys

import numpy as np
import pytest
from hypothesis import settings

from mahler3d import random_polytope, shape

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture
def cube():
    return shape("cube")


@pytest.fixture
def simplex():
    return shape("simplex")


@pytest.fixture
def octahedron():
    return shape("octahedron")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_affine(rng):
    while True:
        A = rng.normal(size=(3, 3))
        if abs(np.linalg.det(A)) > 0.2:
            return A, rng.normal(size=3)


@pytest.fixture(scope="session")
def random_bodies():
    return [random_polytope(n, seed) for seed, n in enumerate([5, 6, 8, 10, 13, 17, 24])]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines.values():
            terminalreporter.write_line(line)
