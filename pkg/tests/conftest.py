import numpy as np
import pytest

from fraclap.geometry import Domain
from fraclap.solver import solve_dirichlet


def one(x):
    return np.ones_like(np.asarray(x, dtype=float))


@pytest.fixture(scope="session")
def unit_interval():
    return Domain.interval(-1.0, 1.0)


@pytest.fixture(scope="session")
def solutions(unit_interval):
    """Solutions of (-Lap)^s u = 1 on (-1, 1), cached per (s, N)."""
    cache = {}

    def get(s, N):
        if (s, N) not in cache:
            cache[s, N] = solve_dirichlet(unit_interval, s, one, N)
        return cache[s, N]

    return get
