import numpy as np
import pytest

import ifsdim as F


@pytest.fixture(scope="session")
def cantor():
    return F.named_system("cantor")


@pytest.fixture(scope="session")
def cantor_measure_1m(cantor):
    traj = F.chaos_game(cantor.system, 0.5, n_steps=1_000_000, burn_in=10_000, seed=101)
    return F.empirical_measure([traj])


@pytest.fixture(scope="session")
def half_pair():
    return F.named_system("half-pair")


@pytest.fixture(scope="session")
def half_measure_1m(half_pair):
    traj = F.chaos_game(half_pair.system, 0.5, n_steps=1_000_000, burn_in=10_000, seed=102)
    return F.empirical_measure([traj])


@pytest.fixture(scope="session")
def quarter_pair():
    return F.named_system("quarter-pair")


@pytest.fixture(scope="session")
def quarter_measure_1m(quarter_pair):
    traj = F.chaos_game(quarter_pair.system, 0.5, n_steps=1_000_000, burn_in=10_000, seed=103)
    return F.empirical_measure([traj])


@pytest.fixture(scope="session")
def decade():
    return F.decade_band_system(0.7)


@pytest.fixture(scope="session")
def decade_traj_1m(decade):
    return F.chaos_game(decade.system, 2.0, n_steps=1_000_000, burn_in=10_000, seed=104)


@pytest.fixture(scope="session")
def decade_measure_1m(decade_traj_1m):
    return F.empirical_measure([decade_traj_1m])


@pytest.fixture(scope="session")
def uniform_cloud_1m():
    rng = np.random.default_rng(77)
    return F.EmpiricalMeasure(rng.random(1_000_000))
