import numpy as np
import pytest

from mrc_wpt.scenario_io import load_scenario


@pytest.fixture(scope="session")
def fig2():
    return load_scenario("paper-fig2")


@pytest.fixture(scope="session")
def fig3():
    return load_scenario("paper-fig3")


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
