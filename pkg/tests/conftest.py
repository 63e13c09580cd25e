import numpy as np
import pytest

from services.graph_utils import banded_adjacency
from src.simulation import build_platoon, platoon_measurements
from src.system_model import CommGraph, LtiModel, lift_system


@pytest.fixture(scope="session")
def seed():
    return 12345


@pytest.fixture
def rng(seed):
    return np.random.default_rng(seed)


@pytest.fixture(scope="session")
def platoon_model():
    return LtiModel(A=[[1.0, 0.01], [0.0, 1.0]], B=[[0.0], [0.01]])


@pytest.fixture(scope="session")
def platoon_graph():
    return CommGraph.from_adjacency(banded_adjacency(5, 2))


@pytest.fixture(scope="session")
def platoon_system(platoon_model, platoon_graph):
    return lift_system(platoon_model, platoon_graph, platoon_measurements(5))


@pytest.fixture
def platoon_config():
    return build_platoon(5, horizon=300, seed=7)


@pytest.fixture
def path3():
    return CommGraph.from_adjacency([[0, 1, 0], [1, 0, 1], [0, 1, 0]])
