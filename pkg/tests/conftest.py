"""Shared fixtures: small grids, the standard parameter set, and cached
variational constants.  Heavy trajectory fixtures live in the modules
that use them so unit tests stay fast."""

import numpy as np
import pytest
from hypothesis import settings, HealthCheck

from beamblow import ModelParams, compute_constants, make_grid

settings.register_profile(
    "suite",
    deadline=None,
    derandomize=True,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def params():
    """Reference parameter set used throughout: p=3, r=2, gamma=0.5, beta=1."""
    return ModelParams(p=3.0, r=2.0, gamma=0.5, beta=1.0)


@pytest.fixture(scope="session")
def grid48():
    return make_grid(1, 48)


@pytest.fixture(scope="session")
def grid64():
    return make_grid(1, 64)


@pytest.fixture(scope="session")
def grid128():
    return make_grid(1, 128)


@pytest.fixture(scope="session")
def grid2d16():
    return make_grid(2, 16)


@pytest.fixture(scope="session")
def consts48(grid48, params):
    return compute_constants(grid48, params)


@pytest.fixture(scope="session")
def consts64(grid64, params):
    return compute_constants(grid64, params)


@pytest.fixture(scope="session")
def consts128(grid128, params):
    return compute_constants(grid128, params)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(2024)


def rel_err(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)
