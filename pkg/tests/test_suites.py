import asyncio
import json
from concurrent.futures import ThreadPoolExecutor

import pytest

from models.detection import DetectionModel
from schemas.experiment import SuiteName
from models.network import MarkedSet
from utils.detector import detect
from utils.run_logger import RunLogger
from utils.suites import (
    catalog, collapse_case, commute_identity_case, detection_case, kdist_case, learning_case, run_named_suite,
    run_suite, scaling_case, scaling_slope, walk_case, SCALING_LENGTHS
)
from utils.electric import effective_resistance
from models.walk import WalkParams


def test_catalog_is_large_enough():
    positives = catalog(5, positive=True)
    negatives = catalog(5, positive=False)
    assert len(positives) >= 30
    assert [name[4:] for name, _ in positives] == [name[4:] for name, _ in negatives]
    assert all(instance[2] for _, instance in positives)
    assert not any(instance[2] for _, instance in negatives)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_commute_identity_case(seed):
    result = commute_identity_case(f"random-{seed}", seed)
    assert all(check.passed for check in result.checks), result.checks


def test_walk_case_on_a_positive_and_a_negative_instance():
    positives = dict(catalog(3, positive=True))
    negatives = dict(catalog(3, positive=False))
    resistance = effective_resistance(*positives["pos-grid-2x3"])
    for case_id, instance in (("pos-grid-2x3", positives["pos-grid-2x3"]), ("neg-grid-2x3", negatives["neg-grid-2x3"])):
        result = walk_case(case_id, instance, WalkParams(resistance=resistance))
        assert all(check.passed for check in result.checks), [c for c in result.checks if not c.passed]


def test_detection_case_records_both_models():
    instance = dict(catalog(3, positive=True))["pos-cycle-05"]
    result = detection_case("pos-cycle-05", instance, WalkParams(resistance=effective_resistance(*instance)),
                            list(DetectionModel))
    assert [row.model for row in result.sweep] == ["ideal-threshold", "qpe-kernel"]
    assert all(check.passed for check in result.checks)


def test_scaling_slope_is_linear():
    rows = [scaling_case(length, WalkParams()).sweep[0] for length in SCALING_LENGTHS]
    assert 0.85 <= scaling_slope(rows) <= 1.15


@pytest.mark.parametrize("sources", [2, 3])
def test_collapse_case(sources):
    result = collapse_case("collapse", 17, sources)
    assert all(check.passed for check in result.checks)


def test_kdist_case_on_a_negative_instance():
    result = kdist_case(5, False, WalkParams(), list(DetectionModel))
    assert all(check.passed for check in result.checks), [c for c in result.checks if not c.passed]
    assert [row.instance_id for row in result.sweep] == ["neg-kdist-05@ideal-threshold", "neg-kdist-05@qpe-kernel"]
    accepts = [c.instance_id for c in result.checks if c.check == "negative-accept"]
    assert accepts == ["neg-kdist-05@ideal-threshold", "neg-kdist-05@qpe-kernel"]


def test_kdist_case_checks_positive_acceptance_from_seven():
    result = kdist_case(7, True, WalkParams(), list(DetectionModel))
    accepts = [c for c in result.checks if c.check == "positive-accept"]
    assert len(accepts) == 2
    assert all(c.passed for c in result.checks), [c for c in result.checks if not c.passed]


def test_learning_case_certifies_every_model():
    result = learning_case(4, WalkParams(), list(DetectionModel))
    labels = [c.instance_id for c in result.checks if c.check == "certification-failures"]
    assert labels == ["or-star-04@ideal-threshold", "or-star-04@qpe-kernel"]
    assert all(c.passed for c in result.checks)


def test_named_suite_writes_sorted_tables(experiment, tmp_path):
    report = asyncio.run(run_named_suite(SuiteName.SCALING, experiment))
    assert report.passed, report.failures
    sweep = (tmp_path / "results" / "scaling.csv").read_text().splitlines()
    assert sweep[0] == "instance-id,n,W,R,theta,steps,model,accept-prob,is-positive"
    assert [line.split(",")[0] for line in sweep[1:]] == sorted(line.split(",")[0] for line in sweep[1:])
    meta = json.loads((tmp_path / "results" / "scaling.meta.json").read_text())
    assert meta["parameters"]["seed"] == experiment.seed
    assert "started_at" in meta


def test_csv_bodies_are_reproducible(experiment, tmp_path):
    config = experiment.model_copy(update={"suite": SuiteName.COLLAPSE})
    assert run_suite(config) == 0
    first = (tmp_path / "results" / "collapse-checks.csv").read_bytes()
    assert run_suite(config) == 0
    assert (tmp_path / "results" / "collapse-checks.csv").read_bytes() == first


def test_walk_case_checks_every_same_part_pair():
    instance = dict(catalog(3, positive=False))["neg-grid-3x3"]
    graph = instance[0]
    result = walk_case("neg-grid-3x3", instance, WalkParams(resistance=2.0))
    check = next(c for c in result.checks if c.check == "same-part-commutator")
    sizes = (len(graph.partition.A), len(graph.partition.B))
    assert check.passed
    assert check.detail == f"{sum(s * (s - 1) // 2 for s in sizes)} pairs"


def test_scaling_rows_record_measured_acceptance():
    result = scaling_case(4, WalkParams())
    row = result.sweep[0]
    graph, sigma, _ = result.instance
    measured = detect(graph, sigma, MarkedSet(), WalkParams(resistance=4.0), DetectionModel.IDEAL, theta=row.theta)
    assert row.accept_prob == pytest.approx(measured.total_accept_prob)
    assert row.accept_prob > 1.0 / 3.0
    assert row.steps == measured.steps


def test_learning_suite_runs_both_models(experiment):
    config = experiment.model_copy(update={"model": "ideal"})
    report = asyncio.run(run_named_suite(SuiteName.LEARNING, config))
    assert report.passed, report.failures
    labels = {c.instance_id.split("@")[1] for c in report.checks if c.check == "certification-failures"}
    assert labels == {"ideal-threshold", "qpe-kernel"}


def test_run_logger_keeps_concurrent_events():
    RunLogger.drain()

    def log(i):
        for j in range(50):
            RunLogger.log_detection(f"case-{i}-{j}", 0.5, 1, "ideal-threshold")

    with ThreadPoolExecutor(max_workers=8) as pool:
        list(pool.map(log, range(8)))
    events = RunLogger.drain()
    assert len(events) == 400
    assert len({e["metadata"]["instance_id"] for e in events}) == 400
    assert RunLogger.drain() == []
