import numpy as np
import pytest

from garnier_lab.schlesinger import gen_schlesinger_b
from garnier_lab.poly_garnier import gen_pg, random_theta_pg

THETA4 = [0.31 - 0.12j, 0.47 + 0.08j, -0.29 + 0.21j, 0.55 - 0.03j]


@pytest.fixture(scope="session")
def b_state():
    """One generic traceless Schlesinger state, reused across read-only tests."""
    return gen_schlesinger_b(THETA4, seed=11)


@pytest.fixture(scope="session")
def pg_state():
    th = random_theta_pg(7)
    return gen_pg(th, 3)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
