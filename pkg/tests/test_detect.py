import math

import numpy as np
import pytest

from conftest import unit_network
from models.detection import DetectionModel, DetectionResult
from models.errors import InvalidParameterError, PreconditionError, UnnormalizedStateError
from models.network import MarkedSet, SourceDistribution
from models.walk import WalkParams
from utils.detector import (
    ancilla_count, collapse_resistance_check, collapsed_params, detect, measure_support_marked,
    qpe_accept_probability, sample_detection, step_bound, working_precision, zero_bucket_probability
)
from utils.electric import effective_resistance, electric_flow
from utils.generators import path_instance, random_weighted_instance
from utils.network_ops import total_weight
from utils.walk_builder import build_walk_operator, positive_witness


def test_measure_without_marked_sources():
    sigma = SourceDistribution.point_mass(0)
    assert measure_support_marked(sigma, MarkedSet.of(1)) == (0.0, sigma)


def test_measure_with_all_sources_marked():
    assert measure_support_marked(SourceDistribution.point_mass(0), MarkedSet.of(0)) == (1.0, None)


def test_measure_collapses_to_the_unmarked_part():
    p_marked, collapsed = measure_support_marked(SourceDistribution(sigma={0: 0.5, 2: 0.5}), MarkedSet.of(0))
    assert p_marked == pytest.approx(0.5)
    assert collapsed.sigma == {2: 1.0}


@pytest.mark.parametrize("t, m", [(2, 1), (3, 2), (4, 5)])
def test_kernel_vanishes_on_other_buckets(t, m):
    assert zero_bucket_probability(2 * math.pi * m / 2 ** t, t) == pytest.approx(0.0, abs=1e-20)


def test_kernel_is_one_at_zero():
    assert zero_bucket_probability(0.0, 5) == 1.0
    assert zero_bucket_probability(np.array([0.0, 1e-14]), 3).tolist() == [1.0, 1.0]


@pytest.mark.parametrize("delta, expected", [(1.0, 0), (0.5, 1), (0.3, 2), (1 / 12, 4)])
def test_ancilla_count(delta, expected):
    assert ancilla_count(delta) == expected


@pytest.mark.parametrize("model", list(DetectionModel))
def test_eigenvalue_one_state_is_always_accepted(single_edge, params, model):
    op = build_walk_operator(*single_edge, params)
    phi = positive_witness(*single_edge, params, electric_flow(*single_edge), op.space)
    assert qpe_accept_probability(op, phi / np.linalg.norm(phi), 0.1, model) == pytest.approx(1.0)


def test_unnormalized_state_is_rejected(single_edge, params):
    op = build_walk_operator(*single_edge, params)
    with pytest.raises(UnnormalizedStateError):
        qpe_accept_probability(op, np.array([1.0, 1.0]), 0.1)


@pytest.mark.parametrize("delta", [0.0, math.pi, -0.5])
def test_precision_must_lie_in_range(single_edge, params, delta):
    op = build_walk_operator(*single_edge, params)
    with pytest.raises(InvalidParameterError):
        qpe_accept_probability(op, np.array([1.0, 0.0]), delta)


def test_all_sources_marked_accepts_without_walking(params):
    graph = unit_network(2, [(0, 1)])
    result = detect(graph, SourceDistribution.point_mass(0), MarkedSet.of(0), params)
    assert result.total_accept_prob == 1.0
    assert result.steps == 0


@pytest.mark.parametrize("model", list(DetectionModel))
def test_single_edge_positive(single_edge, params, model):
    result = detect(*single_edge, params, model)
    assert result.phase_accept_prob >= 8.0 / 9.0 - 1e-12
    assert result.total_accept_prob >= 2.0 / 3.0


def test_single_edge_negative_in_the_ideal_model(single_edge, params):
    graph, sigma, _ = single_edge
    result = detect(graph, sigma, MarkedSet(), params, DetectionModel.IDEAL)
    assert result.total_accept_prob <= 1.0 / 64.0 + 1e-12


@pytest.mark.parametrize("length", [2, 4, 8, 16])
def test_negative_paths_are_rejected(length):
    graph, sigma, marked = path_instance(length, positive=False)
    params = WalkParams(resistance=float(length))
    for model in DetectionModel:
        result = detect(graph, sigma, marked, params, model)
        assert result.total_accept_prob <= 1.0 / 3.0


@pytest.mark.parametrize("length", [2, 4, 8])
def test_positive_paths_are_accepted(length):
    graph, sigma, marked = path_instance(length)
    params = WalkParams(resistance=float(length))
    for model in DetectionModel:
        result = detect(graph, sigma, marked, params, model)
        assert result.total_accept_prob >= 2.0 / 3.0


def test_ideal_steps_respect_the_bound():
    graph, sigma, marked = random_weighted_instance(8, seed=12)
    params = WalkParams(resistance=effective_resistance(graph, sigma, marked))
    result = detect(graph, sigma, marked, params, DetectionModel.IDEAL)
    assert result.steps <= step_bound(params, total_weight(graph))
    assert result.theta_used == pytest.approx(params.theta(total_weight(graph)))


def test_kernel_steps_are_a_power_of_two(single_edge, params):
    result = detect(*single_edge, params, DetectionModel.KERNEL)
    assert result.ancillas == 4
    assert result.steps == 16


def test_resistance_bound_must_cover_the_instance(short_path):
    with pytest.raises(PreconditionError):
        detect(*short_path, WalkParams(resistance=1.0))


def test_non_bipartite_input_is_doubled(triangle):
    graph, sigma, marked = triangle
    result = detect(graph, sigma, marked, WalkParams(resistance=effective_resistance(*triangle)))
    assert result.doubled
    assert result.total_weight == 3.0
    assert result.walk_weight == 6.0


def test_result_rejects_inconsistent_branches():
    with pytest.raises(ValueError):
        DetectionResult(
            early_accept_prob=0.5, phase_accept_prob=0.5, total_accept_prob=0.5, steps=1, theta_used=0.1,
            model=DetectionModel.IDEAL
        )


@pytest.mark.parametrize("sources", [2, 3])
def test_collapse_ratio(sources):
    graph, _, _ = random_weighted_instance(9, seed=sources)
    sigma = SourceDistribution.uniform(range(sources))
    ratio = collapse_resistance_check(graph, sigma, MarkedSet.of(0))
    assert ratio <= 9.0
    assert ratio == pytest.approx(1.0 / (1.0 - 1.0 / sources) ** 2, rel=1e-9)


def test_collapse_ratio_without_marked_sources(short_path):
    assert collapse_resistance_check(*short_path) == 1.0


def test_collapse_needs_a_small_marked_mass(short_path):
    graph, _, marked = short_path
    with pytest.raises(PreconditionError):
        collapse_resistance_check(graph, SourceDistribution(sigma={0: 0.25, 2: 0.75}), marked)


def test_sampling_is_seeded(single_edge, params):
    result = detect(*single_edge, params)
    first = sample_detection(result, 500, seed=3)
    assert first == sample_detection(result, 500, seed=3)
    assert abs(first.frequency - result.total_accept_prob) < 0.1


def test_working_precision_grows_with_length():
    precisions = []
    for length in (2, 4, 8):
        graph, sigma, _ = path_instance(length, positive=False)
        precisions.append(working_precision(graph, sigma, WalkParams(resistance=float(length))))
    assert precisions[0] > precisions[1] > precisions[2] > 0


def test_doubled_instance_keeps_the_step_bound(triangle):
    graph, sigma, marked = triangle
    params = WalkParams(resistance=effective_resistance(*triangle))
    result = detect(graph, sigma, marked, params, DetectionModel.IDEAL)
    assert result.steps == math.ceil(1.0 / params.theta(3.0))
    assert result.steps <= step_bound(params, 3.0)


def test_split_source_combines_both_branches(short_path):
    graph, _, marked = short_path
    sigma = SourceDistribution(sigma={0: 0.5, 2: 0.5})
    params = WalkParams(c1=8.0, c2=4.0, resistance=effective_resistance(graph, sigma, marked))
    assert params.resistance == pytest.approx(0.5)

    result = detect(graph, sigma, marked, params, DetectionModel.IDEAL)
    assert result.early_accept_prob == pytest.approx(0.5)
    assert result.walk_resistance == pytest.approx(params.resistance / 0.25)
    assert result.walk_resistance == pytest.approx(effective_resistance(graph, SourceDistribution.point_mass(0), marked))
    assert result.theta_used == pytest.approx(collapsed_params(params, 0.5).theta(total_weight(graph)))
    assert result.phase_accept_prob >= params.c1 / (1 + params.c1) - 1e-9
    assert result.total_accept_prob == pytest.approx(0.5 + 0.5 * result.phase_accept_prob)
    assert result.total_accept_prob >= params.c1 / (1 + params.c1)


def test_collapsed_params_leave_unmarked_sources_alone(params):
    assert collapsed_params(params, 0.0) is params
    assert collapsed_params(params, 0.5).resistance == pytest.approx(4.0)
