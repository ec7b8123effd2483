import numpy as np
import pytest

from models.network import ElectricNetwork, MarkedSet, Partition, SourceDistribution
from models.walk import WalkParams
from schemas.experiment import ExperimentConfig


def unit_network(vertices, pairs, partition=None):
    return ElectricNetwork(vertices=vertices, edges=[(u, v, 1.0) for u, v in pairs], partition=partition)


@pytest.fixture
def single_edge():
    """0 - 1, sigma at 0, M = {1}, bipartite with 0 in A"""
    graph = unit_network(2, [(0, 1)], Partition(A=frozenset({0}), B=frozenset({1})))
    return graph, SourceDistribution.point_mass(0), MarkedSet.of(1)


@pytest.fixture
def short_path():
    """0 - 1 - 2, sigma at 0, M = {2}"""
    return unit_network(3, [(0, 1), (1, 2)]), SourceDistribution.point_mass(0), MarkedSet.of(2)


@pytest.fixture
def parallel_pair():
    """Source 0 joined to the two marked vertices 1 and 2"""
    return unit_network(3, [(0, 1), (0, 2)]), SourceDistribution.point_mass(0), MarkedSet.of(1, 2)


@pytest.fixture
def triangle():
    return unit_network(3, [(0, 1), (1, 2), (0, 2)]), SourceDistribution.point_mass(0), MarkedSet.of(1)


@pytest.fixture
def params():
    return WalkParams(c1=8.0, c2=4.0, resistance=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def experiment(tmp_path):
    return ExperimentConfig(out_dir=str(tmp_path / "results"), seed=11, max_workers=2)
