import json

import numpy as np
import pytest

from models.detection import DetectionModel
from models.errors import NoCollisionError, PreconditionError, ScaleExceededError
from models.kdist import KDistInstance
from models.walk import WalkParams
from utils.kdistinctness import (
    build_kdist_graph, kdist_detect, kdist_flow, kdist_negative_witness_norm, kdist_positive_witness,
    level_psi, level_sizes, load_kdist_instance, padded_negative, padded_positive, preimage_counts,
    restricted_distribution, subset_type, validate_instance, walk_params
)
from utils.walk_builder import build_psi, build_space, build_walk_operator, negative_witness


def kdist_graph(n, positive=True):
    x = padded_positive(n) if positive else padded_negative(n)
    return build_kdist_graph(KDistInstance(x=x, k=3, r=(1, 1)))


@pytest.mark.parametrize(
    "subset, expected",
    [
        ((), (0, 0, 0)),
        ((0, 1), (0, 1, 0)),
        ((0, 2), (2, 0, 0)),
    ],
)
def test_subset_type(subset, expected):
    assert subset_type(subset, (1, 1, 2), 3) == expected


@pytest.mark.parametrize(
    "n, expected",
    [
        (6, (1, 1, 1, 2, 2, 3)),
        (8, (1, 1, 1, 2, 2, 3, 3, 4)),
        (9, (1, 1, 1, 2, 2, 3, 3, 4, 4)),
    ],
)
def test_padded_positive(n, expected):
    assert padded_positive(n) == expected


def test_padded_negative():
    assert padded_negative(5) == (1, 1, 2, 2, 3)


@pytest.mark.parametrize(
    "x, k, r",
    [
        ((1, 1, 2, 2), 3, (1,)),
        ((1, 1, 1, 2, 2, 2, 3, 3), 3, (1, 1)),
        ((1, 1, 1, 1, 2, 2, 3, 3), 3, (1, 1)),
        ((1, 1, 2, 2, 3), 3, (2, 1)),
    ],
)
def test_invalid_instances_are_reported(x, k, r):
    assert validate_instance(x, k, r)


def test_valid_instance_has_an_empty_report():
    assert validate_instance((1, 1, 1, 2, 2, 3)) == []


def test_distinct_input_has_no_base_level():
    with pytest.raises(PreconditionError):
        build_kdist_graph(KDistInstance(x=(1, 2, 3, 4, 5)))


@pytest.mark.parametrize("n, positive", [(5, False), (6, True), (6, False), (7, True), (8, True)])
def test_degree_structure(n, positive):
    graph = kdist_graph(n, positive)
    degrees = [len(edges) for edges in graph.network.incidence]
    k = graph.instance.k
    for level, members in enumerate(graph.levels):
        expected = k if level == k else n
        assert all(degrees[graph.ids[s]] == expected for s in members)
    assert all(degrees[graph.subset_count + offset] == 1 for offset in range(len(graph.deadends)))
    assert bool(graph.levels[k]) == positive
    assert graph.marked.marked == frozenset(graph.ids[s] for s in graph.levels[k])


@pytest.mark.parametrize("n", [6, 7, 8])
def test_preimage_counts(n):
    graph = kdist_graph(n)
    tau = graph.instance.base_type
    for level, counts in preimage_counts(graph).items():
        assert set(counts) == {tau[level - 1] + 1}


def test_levels_alternate_between_parts():
    graph = kdist_graph(6)
    partition = graph.network.partition
    for level, members in enumerate(graph.levels):
        assert all((graph.ids[s] in partition.A) == (level % 2 == 0) for s in members)
    assert level_sizes(graph)[0] == len(graph.sigma.support)


@pytest.mark.parametrize("n", [6, 7, 8, 9])
def test_flow_is_conserved(n):
    graph = kdist_graph(n)
    flow = kdist_flow(graph)
    assert flow.max_residual(graph.network, restricted_distribution(graph), graph.marked) <= 1e-12


def test_flow_needs_a_collision():
    with pytest.raises(NoCollisionError):
        kdist_flow(kdist_graph(6, positive=False))


def test_level_psi_matches_the_standard_psi(params):
    graph = kdist_graph(6)
    run_params = walk_params(graph, params)
    space = build_space(graph.network, graph.sigma)
    for vertex in range(graph.network.vertices):
        if vertex in graph.marked:
            continue
        standard = build_psi(vertex, graph.network, graph.sigma, run_params, space)
        assert np.max(np.abs(standard - level_psi(graph, vertex, params.c1, space))) <= 1e-12


@pytest.mark.parametrize("n", [6, 7])
def test_positive_witness(n, params):
    graph = kdist_graph(n)
    phi, space = kdist_positive_witness(graph, params)
    outside = len(restricted_distribution(graph).sigma)
    assert phi @ phi == pytest.approx((graph.instance.k + params.c1) / outside, rel=1e-12)

    op = build_walk_operator(graph.network, graph.sigma, graph.marked, walk_params(graph, params))
    assert np.linalg.norm(op.unitary @ phi - phi) <= 1e-9 * np.linalg.norm(phi)


@pytest.mark.parametrize("n, positive", [(5, False), (6, True)])
def test_negative_witness_norm(n, positive, params):
    graph = kdist_graph(n, positive)
    run_params = walk_params(graph, params)
    w = negative_witness(graph.network, graph.sigma, run_params)
    assert np.linalg.norm(w) == pytest.approx(kdist_negative_witness_norm(graph, params), rel=1e-12)
    bound = 1 + params.c1 * n * (graph.subset_count - len(graph.levels[-1])) / len(graph.levels[0])
    assert kdist_negative_witness_norm(graph, params) ** 2 <= bound


@pytest.mark.parametrize("n", [5, 6, 7])
def test_negative_instances_are_rejected(n, params):
    result = kdist_detect(KDistInstance(x=padded_negative(n)), params, DetectionModel.IDEAL)
    assert result.total_accept_prob <= 1.0 / 3.0
    graph = kdist_graph(n, positive=False)
    assert result.theta_used == pytest.approx(1.0 / (params.c2 * kdist_negative_witness_norm(graph, params)))


@pytest.mark.parametrize("model", list(DetectionModel))
@pytest.mark.parametrize("n", [7, 8, 9])
def test_positive_instance_is_accepted(n, model, params):
    result = kdist_detect(KDistInstance(x=padded_positive(n)), params, model)
    assert result.total_accept_prob >= 2.0 / 3.0


def test_six_element_positive_cannot_reach_two_thirds(params):
    graph = kdist_graph(6, positive=True)
    outside = len(restricted_distribution(graph).sigma)
    overlap_sq = params.c1 * outside / ((graph.instance.k + params.c1) * len(graph.levels[0]))
    assert overlap_sq < 2.0 / 3.0
    result = kdist_detect(graph.instance, params, DetectionModel.IDEAL)
    assert result.total_accept_prob < 2.0 / 3.0


def test_basis_limit_is_enforced():
    with pytest.raises(ScaleExceededError):
        build_kdist_graph(KDistInstance(x=padded_positive(8)), max_basis=10)


def test_load_instance_file(tmp_path):
    path = tmp_path / "x.json"
    path.write_text(json.dumps({"x": [1, 1, 1, 2, 2, 3]}))
    instance = load_kdist_instance(path)
    assert instance.is_positive
    assert instance.collision == (0, 1, 2)
