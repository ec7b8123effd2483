import numpy as np
import pytest

from conftest import unit_network
from models.errors import DisconnectedSourceError, InvalidFlowError, PreconditionError
from models.flow import Flow
from models.network import ElectricNetwork, MarkedSet, SourceDistribution
from utils.electric import (
    check_flow, commute_identity_errors, commute_time, effective_resistance, electric_flow, flow_energy,
    hitting_time, potentials, random_circulation, reversed_network
)
from utils.generators import random_weighted_instance
from utils.network_ops import stationary_distribution, total_weight


def test_series_resistance(short_path):
    assert effective_resistance(*short_path) == pytest.approx(2.0)


def test_parallel_resistance(parallel_pair):
    assert effective_resistance(*parallel_pair) == pytest.approx(0.5)


def test_triangle_resistance(triangle):
    assert effective_resistance(*triangle) == pytest.approx(2.0 / 3.0)


def test_single_edge_flow_is_forced(single_edge):
    flow = electric_flow(*single_edge)
    assert flow.values.tolist() == pytest.approx([1.0])
    assert flow_energy(flow, single_edge[0]) == pytest.approx(1.0)


@pytest.mark.parametrize(
    "values, expected",
    [
        ([0.0, 0.0], 0.0),
        ([0.5, 0.5], 0.5),
    ],
)
def test_flow_energy(parallel_pair, values, expected):
    assert flow_energy(Flow(values=np.array(values)), parallel_pair[0]) == pytest.approx(expected)


def test_heavier_edge_lowers_resistance():
    graph = ElectricNetwork(vertices=2, edges=[(0, 1, 4.0)])
    assert effective_resistance(graph, SourceDistribution.point_mass(0), MarkedSet.of(1)) == pytest.approx(0.25)


def test_potentials_ground_the_marked_set(short_path):
    phi = potentials(*short_path)
    assert phi.tolist() == pytest.approx([2.0, 1.0, 0.0])


def test_electric_flow_conserves():
    graph, sigma, marked = random_weighted_instance(12, seed=3)
    flow = electric_flow(graph, sigma, marked)
    assert check_flow(flow, graph, sigma, marked, tolerance=1e-12) <= 1e-12


def test_electric_flow_has_minimal_energy(rng):
    graph, sigma, marked = random_weighted_instance(10, seed=5)
    flow = electric_flow(graph, sigma, marked)
    resistance = flow_energy(flow, graph)
    for _ in range(20):
        circulation = random_circulation(graph, marked, rng, scale=0.3)
        perturbed = Flow(values=flow.values + circulation.values)
        assert check_flow(perturbed, graph, sigma, marked) <= 1e-9
        assert flow_energy(perturbed, graph) >= resistance - 1e-12


def test_resistance_ignores_edge_orientation():
    graph, sigma, marked = random_weighted_instance(9, seed=8)
    assert effective_resistance(reversed_network(graph), sigma, marked) == pytest.approx(
        effective_resistance(graph, sigma, marked), rel=1e-12
    )


def test_reversed_flow_negates_values(short_path):
    flow = electric_flow(*short_path)
    assert flow.reversed().values.tolist() == pytest.approx((-flow.values).tolist())


def test_zero_flow_violates_conservation(short_path):
    with pytest.raises(InvalidFlowError):
        check_flow(Flow.zero(short_path[0]), *short_path)


def test_sources_on_marked_vertices_cost_nothing(short_path):
    graph, _, marked = short_path
    assert effective_resistance(graph, SourceDistribution.point_mass(2), marked) == 0.0


def test_empty_marked_set_is_rejected(short_path):
    graph, sigma, _ = short_path
    with pytest.raises(PreconditionError):
        electric_flow(graph, sigma, MarkedSet())


def test_source_without_a_marked_vertex_is_rejected():
    graph = unit_network(4, [(0, 1), (2, 3)])
    with pytest.raises(DisconnectedSourceError):
        effective_resistance(graph, SourceDistribution.point_mass(0), MarkedSet.of(3))


@pytest.mark.parametrize(
    "graph, sigma, marked, expected",
    [
        (unit_network(2, [(0, 1)]), SourceDistribution.point_mass(0), MarkedSet.of(1), 1.0),
        (unit_network(3, [(0, 1), (1, 2)]), SourceDistribution.point_mass(0), MarkedSet.of(2), 4.0),
    ],
)
def test_hitting_time(graph, sigma, marked, expected):
    assert hitting_time(graph, sigma, marked) == pytest.approx(expected)


def test_stationary_hitting_time_matches_resistance(short_path):
    graph, _, marked = short_path
    pi = stationary_distribution(graph)
    expected = 2 * total_weight(graph) * effective_resistance(graph, pi, marked)
    assert hitting_time(graph, pi, marked) == pytest.approx(expected)


@pytest.mark.parametrize("length", [1, 2, 3, 5, 8])
def test_commute_time_on_paths(length):
    graph = unit_network(length + 1, [(i, i + 1) for i in range(length)])
    assert commute_time(graph, 0, length) == pytest.approx(2 * length ** 2)


def test_commute_time_on_triangle(triangle):
    assert commute_time(triangle[0], 0, 2) == pytest.approx(4.0)


@pytest.mark.parametrize("seed", range(5))
def test_commute_identities_on_random_graphs(seed):
    graph, _, _ = random_weighted_instance(15 + seed, seed=seed)
    errors = commute_identity_errors(graph, 0, graph.vertices - 1, MarkedSet.of(1, 2))
    assert errors["commute"] <= 1e-9
    assert errors["stationary"] <= 1e-9
