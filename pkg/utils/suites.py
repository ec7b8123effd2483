import asyncio
import logging
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from models.detection import DetectionModel
from models.errors import WalkSearchError
from models.flow import Flow
from models.kdist import KDistInstance
from models.network import ElectricNetwork, MarkedSet, SourceDistribution
from models.walk import WalkParams
from schemas.experiment import ExperimentConfig, Family, GeneratorParams, SuiteName
from schemas.results import CheckRow, SuiteReport, SweepRow
from utils.detector import collapse_resistance_check, detect, measure_support_marked, step_bound, working_precision
from utils.electric import (
    commute_identity_errors, effective_resistance, electric_flow, flow_energy, random_circulation, reversed_network
)
from utils.exporters import checks_frame, sweep_frame, write_csv, write_meta
from utils.generators import generate, path_instance, random_weighted_instance
from utils.kdistinctness import (
    build_kdist_graph, kdist_detect, kdist_flow, kdist_negative_witness_norm, kdist_positive_witness,
    level_psi, level_sizes, padded_negative, padded_positive, preimage_counts, restricted_distribution, walk_params
)
from utils.learning_compiler import LearningGraphCompiler, chain_graph, star_graph, unit_vectors
from utils.network_ops import dump_instance, total_weight
from utils.run_logger import RunLogger, safe_log_event
from utils.walk_builder import (
    build_psi, build_space, build_walk_operator, check_rw_lower_bound, commutator_norm, effective_gap_check,
    local_reflection, negative_witness, positive_witness
)

logger = logging.getLogger(__name__)

Instance = Tuple[ElectricNetwork, SourceDistribution, MarkedSet]

SCALING_LENGTHS = (2, 4, 8, 16, 32)
OR_SIZES = (2, 4, 9, 16)
KDIST_SIZES = (5, 6, 7, 8, 9)
# n = 6 leaves too few V_0 subsets outside the collision for overlap^2 to reach 2/3
KDIST_ACCEPT_SIZES = (7, 8, 9)


class CaseResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    instance_id: str
    sweep: List[SweepRow] = []
    checks: List[CheckRow] = []
    errors: List[str] = []
    instance: Optional[Tuple[ElectricNetwork, SourceDistribution, MarkedSet]] = None


def _at_most(instance_id: str, check: str, value: float, bound: float, detail: Optional[str] = None) -> CheckRow:
    return CheckRow(instance_id=instance_id, check=check, value=value, bound=bound, passed=value <= bound, detail=detail)


def _at_least(instance_id: str, check: str, value: float, bound: float, detail: Optional[str] = None) -> CheckRow:
    return CheckRow(instance_id=instance_id, check=check, value=value, bound=bound, passed=value >= bound, detail=detail)


def catalog(seed: int, positive: bool) -> List[Tuple[str, Instance]]:
    """Desk-scale instances across every graph family, bipartite or doubled"""
    specs: List[Tuple[str, Family, GeneratorParams, int]] = []
    for n in range(1, 7):
        specs.append((f"path-{n:02d}", Family.PATH, GeneratorParams(n=n, positive=positive), 0))
    for n in range(3, 9):
        specs.append((f"cycle-{n:02d}", Family.CYCLE, GeneratorParams(n=n, positive=positive), 0))
    for rows, cols in [(2, 2), (2, 3), (3, 3)]:
        specs.append((f"grid-{rows}x{cols}", Family.GRID, GeneratorParams(rows=rows, cols=cols, positive=positive), 0))
    for n in range(1, 5):
        specs.append((f"star-{n:02d}", Family.STAR, GeneratorParams(n=n, positive=positive), 0))
    for n in range(3, 6):
        specs.append((f"complete-{n:02d}", Family.COMPLETE, GeneratorParams(n=n, positive=positive), 0))
    for index, n in enumerate(range(4, 9)):
        specs.append((f"random-{n:02d}", Family.RANDOM_WEIGHTED, GeneratorParams(n=n, positive=positive), seed + index))
    for n in range(2, 5):
        specs.append((f"learning-or-{n:02d}", Family.LEARNING_OR, GeneratorParams(n=n, positive=positive), 0))
    prefix = "pos" if positive else "neg"
    return [(f"{prefix}-{name}", generate(family, params, case_seed)) for name, family, params, case_seed in specs]


def _resistance_map(seed: int) -> dict:
    return {
        instance_id.replace("pos-", "", 1): effective_resistance(*instance)
        for instance_id, instance in catalog(seed, positive=True)
    }


# commute-time identity -------------------------------------------------

def commute_identity_case(case_id: str, seed: int) -> CaseResult:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 51))
    graph, _, _ = random_weighted_instance(n, seed, edge_probability=min(1.0, 4.0 / n))
    size = int(rng.integers(1, 4))
    marked = MarkedSet(marked=frozenset(int(u) for u in rng.choice(n, size=size, replace=False)))
    s, t = 0, n - 1
    errors = commute_identity_errors(graph, s, t, marked)

    checks = [
        _at_most(case_id, "commute-time-identity", errors["commute"], 1e-9),
        _at_most(case_id, "stationary-hitting-identity", errors["stationary"], 1e-9),
    ]

    pair = SourceDistribution.point_mass(s)
    target = MarkedSet.of(t)
    flow = electric_flow(graph, pair, target)
    resistance = flow_energy(flow, graph)
    lowest = min(
        flow_energy(Flow(values=flow.values + random_circulation(graph, target, rng, 0.1).values), graph)
        for _ in range(20)
    )
    checks.append(_at_least(case_id, "energy-minimality", lowest, resistance - 1e-12 * max(1.0, resistance)))

    flipped = reversed_network(graph)
    flipped_energy = flow_energy(electric_flow(flipped, pair, target), flipped)
    checks.append(_at_most(case_id, "orientation-independence", abs(flipped_energy - resistance) / resistance, 1e-12))

    index = int(rng.integers(0, graph.edge_count))
    heavier = ElectricNetwork(
        vertices=graph.vertices,
        edges=[(u, v, w * 2 if i == index else w) for i, (u, v, w) in enumerate(graph.edges)]
    )
    checks.append(_at_most(case_id, "rayleigh-monotonicity", effective_resistance(heavier, pair, target), resistance + 1e-12))
    return CaseResult(instance_id=case_id, checks=checks, instance=(graph, pair, target))


# walk ----------------------------------------------------------------------

def _commutator_checks(case_id: str, graph, sigma, marked, params, op) -> List[CheckRow]:
    """Every pair of reflections within A, and within B"""
    worst, pairs = 0.0, 0
    for part in (graph.partition.A, graph.partition.B):
        reflections = [local_reflection(u, graph, sigma, marked, params, op.space) for u in sorted(part)]
        for i in range(len(reflections)):
            for j in range(i + 1, len(reflections)):
                worst = max(worst, commutator_norm(reflections[i], reflections[j]))
                pairs += 1
    return [_at_most(case_id, "same-part-commutator", worst, 1e-12, detail=f"{pairs} pairs")]


def walk_case(case_id: str, instance: Instance, params: WalkParams) -> CaseResult:
    graph, sigma, marked = instance
    op = build_walk_operator(graph, sigma, marked, params)
    error_a, error_b = op.involution_errors()
    checks = [
        _at_most(case_id, "unitarity", op.unitarity_error(), 1e-10),
        _at_most(case_id, "reflection-a-involution", error_a, 1e-10),
        _at_most(case_id, "reflection-b-involution", error_b, 1e-10),
        _at_most(case_id, "spectral-reassembly", op.reassembly_error(), 1e-8),
    ]
    checks.extend(_commutator_checks(case_id, graph, sigma, marked, params, op))
    varsigma = op.space.source_state(sigma)

    if marked:
        flow = electric_flow(graph, sigma, marked)
        phi = positive_witness(graph, sigma, marked, params, flow, op.space)
        norm = float(np.linalg.norm(phi))
        checks.append(_at_most(case_id, "eigenvector", float(np.linalg.norm(op.unitary @ phi - phi)), 1e-9 * norm))
        overlap = float(phi @ varsigma) / norm
        checks.append(_at_least(case_id, "overlap", overlap, math.sqrt(params.c1 / (1 + params.c1)) - 1e-12))
        product = check_rw_lower_bound(graph, sigma, marked, flow)
        checks.append(_at_least(case_id, "rw-lower-bound", product, 1.0 - 1e-12))
        if graph.edge_count == 1:
            checks.append(_at_most(case_id, "rw-equality", abs(product - 1.0), 1e-12))
        return CaseResult(instance_id=case_id, checks=checks, instance=instance)

    w = negative_witness(graph, sigma, params, op.space)
    norm = float(np.linalg.norm(w))
    expected = 1 + params.c1 * params.resistance * total_weight(graph)
    checks.extend([
        _at_most(case_id, "kernel-pi-a", float(np.linalg.norm(op.projector_a @ w)), 1e-9 * norm),
        _at_most(case_id, "image-pi-b", float(np.linalg.norm(op.projector_b @ w - varsigma)), 1e-9 * norm),
        _at_most(case_id, "witness-norm", abs(norm ** 2 - expected) / expected, 1e-9),
    ])
    worst = -math.inf
    for theta in np.geomspace(1e-3, math.pi, 20):
        lhs, bound = effective_gap_check(op, w, float(theta))
        worst = max(worst, lhs - bound)
    checks.append(_at_most(case_id, "effective-gap", worst, 1e-9))
    return CaseResult(instance_id=case_id, checks=checks, instance=instance)


# detection -----------------------------------------------------------------

def detection_case(
        case_id: str,
        instance: Instance,
        params: WalkParams,
        models: Sequence[DetectionModel]
) -> CaseResult:
    graph, sigma, marked = instance
    positive = bool(marked)
    weight = total_weight(graph)
    sweep, checks = [], []
    for model in models:
        result = detect(graph, sigma, marked, params, model)
        label = f"{case_id}@{model.value}"
        sweep.append(SweepRow(
            instance_id=label,
            n=graph.vertices,
            W=weight,
            R=params.resistance,
            theta=result.theta_used,
            steps=result.steps,
            model=model.value,
            accept_prob=result.total_accept_prob,
            is_positive=positive
        ))
        if positive:
            checks.append(_at_least(label, "positive-accept", result.total_accept_prob, 2.0 / 3.0))
        else:
            checks.append(_at_most(label, "negative-accept", result.total_accept_prob, 1.0 / 3.0))
        if model == DetectionModel.IDEAL:
            checks.append(_at_most(label, "step-bound", result.steps, step_bound(params, weight)))
    return CaseResult(instance_id=case_id, sweep=sweep, checks=checks, instance=instance)


# scaling -------------------------------------------------------------------

def scaling_case(length: int, params: WalkParams) -> CaseResult:
    """Working precision on the unmarked path of the given length, with R = W = L.

    accept-prob is the ideal-threshold acceptance measured at that precision,
    the first value past 1/3.
    """
    graph, sigma, _ = path_instance(length, positive=False)
    run_params = params.with_resistance(float(length))
    theta = working_precision(graph, sigma, run_params)
    result = detect(graph, sigma, MarkedSet(), run_params, DetectionModel.IDEAL, theta=theta)
    row = SweepRow(
        instance_id=f"path-{length:03d}",
        n=graph.vertices,
        W=total_weight(graph),
        R=float(length),
        theta=theta,
        steps=result.steps,
        model=DetectionModel.IDEAL.value,
        accept_prob=result.total_accept_prob,
        is_positive=False
    )
    return CaseResult(instance_id=row.instance_id, sweep=[row], instance=(graph, sigma, MarkedSet()))


def scaling_slope(rows: Sequence[SweepRow]) -> float:
    """Least-squares slope of log(1/theta) against log sqrt(RW)"""
    x = np.log([math.sqrt(row.R * row.W) for row in rows])
    y = np.log([1.0 / row.theta for row in rows])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


# learning ------------------------------------------------------------------

def learning_case(n: int, params: WalkParams, models: Sequence[DetectionModel]) -> CaseResult:
    case_id = f"or-star-{n:02d}"
    compiler = LearningGraphCompiler(star_graph(n, "or"))
    positives = unit_vectors(n)
    value = compiler.complexity(positives)
    checks = [_at_most(case_id, "or-complexity", abs(value - math.sqrt(n)), 1e-12)]
    for model in models:
        report = compiler.certify_detection(positives, [(0,) * n], params, model)
        checks.append(_at_most(f"{case_id}@{model.value}", "certification-failures", float(len(report.failures)), 0.0,
                               detail="; ".join(report.failures) or None))
    compiled = compiler.compile(positives[-1])
    return CaseResult(
        instance_id=case_id,
        checks=checks,
        instance=(compiled.network, compiled.sigma, compiled.marked)
    )


def and_chain_case(params: WalkParams, models: Sequence[DetectionModel]) -> CaseResult:
    case_id = "and-chain-02"
    compiler = LearningGraphCompiler(chain_graph(2, "and"))
    checks = [_at_most(case_id, "and-resistance", abs(compiler.resistance((1, 1)) - 2.0), 1e-12)]
    for model in models:
        report = compiler.certify_detection([(1, 1)], [(0, 0), (0, 1), (1, 0)], params, model)
        checks.append(_at_most(f"{case_id}@{model.value}", "certification-failures", float(len(report.failures)), 0.0,
                               detail="; ".join(report.failures) or None))
    return CaseResult(instance_id=case_id, checks=checks)


# kdist ---------------------------------------------------------------------

def kdist_structure_checks(case_id: str, graph) -> List[CheckRow]:
    instance = graph.instance
    n, k = instance.n, instance.k
    network = graph.network
    degrees = [len(edges) for edges in network.incidence]
    checks = []
    wrong = 0
    for level, members in enumerate(graph.levels):
        expected = k if level == k else n
        wrong += sum(1 for s in members if degrees[graph.ids[s]] != expected)
    wrong += sum(1 for offset in range(len(graph.deadends)) if degrees[graph.subset_count + offset] != 1)
    checks.append(_at_most(case_id, "degree-structure", float(wrong), 0.0))

    counts = preimage_counts(graph)
    tau = instance.base_type
    mismatched = sum(1 for level, row in counts.items() for c in row if c != tau[level - 1] + 1)
    checks.append(_at_most(case_id, "preimage-counts", float(mismatched), 0.0))

    sizes = level_sizes(graph)
    for level in range(1, k + 1):
        lhs = sizes[level] * (tau[level - 1] + 1)
        checks.append(_at_most(case_id, f"level-{level}-size", float(lhs), float(n * math.comb(k, level) * sizes[0])))
    return checks


def kdist_case(n: int, positive: bool, params: WalkParams, models: Sequence[DetectionModel]) -> CaseResult:
    x = padded_positive(n) if positive else padded_negative(n)
    case_id = f"{'pos' if positive else 'neg'}-kdist-{n:02d}"
    graph = build_kdist_graph(KDistInstance(x=x, k=3, r=(1, 1)))
    checks = kdist_structure_checks(case_id, graph)
    run_params = walk_params(graph, params)
    network = graph.network
    space = build_space(network, graph.sigma)

    differences = 0.0
    for vertex in range(network.vertices):
        if vertex in graph.marked:
            continue
        standard = build_psi(vertex, network, graph.sigma, run_params, space)
        level_based = level_psi(graph, vertex, params.c1, space)
        differences = max(differences, float(np.max(np.abs(standard - level_based))))
    checks.append(_at_most(case_id, "level-psi-matches", differences, 1e-12))

    base = len(graph.levels[0])
    norm_sq = kdist_negative_witness_norm(graph, params) ** 2
    vertex_bound = 1 + params.c1 * n * (graph.subset_count - len(graph.levels[-1])) / base
    checks.append(_at_most(case_id, "witness-norm-bound", norm_sq, vertex_bound))

    if positive:
        flow = kdist_flow(graph)
        restricted = restricted_distribution(graph)
        checks.append(_at_most(case_id, "flow-residual", flow.max_residual(network, restricted, graph.marked), 1e-12))
        phi, space = kdist_positive_witness(graph, params)
        outside = len(restricted.sigma)
        k = graph.instance.k
        expected = k + params.c1
        checks.append(_at_most(case_id, "phi-norm", abs(phi @ phi - expected / outside) * outside / expected, 1e-12))
        overlap = float(phi @ space.source_state(graph.sigma)) / float(np.linalg.norm(phi))
        closed = math.sqrt(params.c1 * outside / ((k + params.c1) * base))
        checks.append(_at_most(case_id, "phi-overlap", abs(overlap - closed), 1e-12))

    sweep = []
    for model in models:
        result = kdist_detect(graph.instance, params, model)
        label = f"{case_id}@{model.value}"
        sweep.append(SweepRow(
            instance_id=label,
            n=network.vertices,
            W=total_weight(network),
            R=run_params.resistance,
            theta=result.theta_used,
            steps=result.steps,
            model=model.value,
            accept_prob=result.total_accept_prob,
            is_positive=positive
        ))
        if not positive:
            checks.append(_at_most(label, "negative-accept", result.total_accept_prob, 1.0 / 3.0))
        elif n in KDIST_ACCEPT_SIZES:
            checks.append(_at_least(label, "positive-accept", result.total_accept_prob, 2.0 / 3.0))
    if not positive:
        op = build_walk_operator(network, graph.sigma, graph.marked, run_params)
        w = negative_witness(network, graph.sigma, run_params, op.space)
        varsigma = op.space.source_state(graph.sigma)
        checks.append(_at_most(case_id, "kernel-pi-a", float(np.linalg.norm(op.projector_a @ w)), 1e-9 * np.linalg.norm(w)))
        checks.append(_at_most(case_id, "image-pi-b", float(np.linalg.norm(op.projector_b @ w - varsigma)), 1e-9 * np.linalg.norm(w)))
    return CaseResult(instance_id=case_id, sweep=sweep, checks=checks, instance=(network, graph.sigma, graph.marked))


# collapse ------------------------------------------------------------------

def collapse_case(case_id: str, seed: int, sources: int) -> CaseResult:
    """sigma uniform on `sources` vertices, exactly one of them marked"""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(sources + 2, 11))
    graph, _, _ = random_weighted_instance(n, seed)
    chosen = [int(u) for u in rng.choice(n, size=sources, replace=False)]
    sigma = SourceDistribution.uniform(chosen)
    marked = MarkedSet.of(chosen[0])
    p_marked, _ = measure_support_marked(sigma, marked)
    ratio = collapse_resistance_check(graph, sigma, marked)
    expected = 1.0 / (1.0 - p_marked) ** 2
    return CaseResult(
        instance_id=case_id,
        checks=[
            _at_most(case_id, "collapse-ratio", ratio, 9.0),
            _at_most(case_id, "collapse-closed-form", abs(ratio - expected) / expected, 1e-9),
        ],
        instance=(graph, sigma, marked)
    )


# runner --------------------------------------------------------------------

async def _run_cases(cases: List[Tuple[str, Callable[[], CaseResult]]], max_workers: int) -> List[CaseResult]:
    """Run cases in worker threads; results come back sorted by instance id"""
    semaphore = asyncio.Semaphore(max_workers)

    async def run(case_id: str, work: Callable[[], CaseResult]) -> CaseResult:
        async with semaphore:
            try:
                return await asyncio.to_thread(work)
            except WalkSearchError as e:
                return CaseResult(instance_id=case_id, errors=[str(e)])

    results = await asyncio.gather(*(run(case_id, work) for case_id, work in cases))
    return sorted(results, key=lambda result: result.instance_id)


def _suite_cases(name: SuiteName, config: ExperimentConfig) -> List[Tuple[str, Callable[[], CaseResult]]]:
    params = config.walk_params()
    models = list(DetectionModel)
    seed = config.seed

    if name == SuiteName.COMMUTE:
        return [(f"random-{i:02d}", lambda i=i: commute_identity_case(f"random-{i:02d}", seed + i)) for i in range(50)]
    if name in (SuiteName.WALK, SuiteName.DETECTION):
        resistances = _resistance_map(seed)
        cases = []
        for positive in (True, False):
            for case_id, instance in catalog(seed, positive):
                run_params = params.with_resistance(resistances[case_id.split("-", 1)[1]])
                if name == SuiteName.WALK:
                    work = lambda c=case_id, i=instance, p=run_params: walk_case(c, i, p)
                else:
                    work = lambda c=case_id, i=instance, p=run_params: detection_case(c, i, p, models)
                cases.append((case_id, work))
        return cases
    if name == SuiteName.SCALING:
        return [(f"path-{L:03d}", lambda L=L: scaling_case(L, params)) for L in SCALING_LENGTHS]
    if name == SuiteName.LEARNING:
        cases = [(f"or-star-{n:02d}", lambda n=n: learning_case(n, params, models)) for n in OR_SIZES]
        cases.append(("and-chain-02", lambda: and_chain_case(params, models)))
        return cases
    if name == SuiteName.KDIST:
        cases = [(f"neg-kdist-{n:02d}", lambda n=n: kdist_case(n, False, params, models)) for n in KDIST_SIZES]
        cases.extend(
            (f"pos-kdist-{n:02d}", lambda n=n: kdist_case(n, True, params, models)) for n in KDIST_SIZES if n >= 6
        )
        return cases
    if name == SuiteName.COLLAPSE:
        return [
            (f"collapse-{i:02d}", lambda i=i: collapse_case(f"collapse-{i:02d}", seed + i, 2 + i % 2))
            for i in range(10)
        ]
    raise WalkSearchError(f"suite '{name.value}' has no cases of its own")


def _finalize_scaling(report: SuiteReport) -> None:
    if len(report.sweep) < 2:
        return
    slope = scaling_slope(report.sweep)
    report.checks.append(CheckRow(
        instance_id="path-sweep",
        check="scaling-slope",
        value=slope,
        bound=1.0,
        passed=0.85 <= slope <= 1.15,
        detail="slope of log(1/delta) against log sqrt(RW), accepted in [0.85, 1.15]"
    ))


async def run_named_suite(name: SuiteName, config: ExperimentConfig) -> SuiteReport:
    started = datetime.now(timezone.utc)
    out_dir = Path(config.out_dir)
    results = await _run_cases(_suite_cases(name, config), config.max_workers)

    report = SuiteReport(name=name.value)
    for result in results:
        report.sweep.extend(result.sweep)
        report.checks.extend(result.checks)
        reasons = list(result.errors) + [
            f"{check.check}: {check.value:.6g} vs {check.bound:.6g}" for check in result.checks if not check.passed
        ]
        if not reasons:
            continue
        replay = None
        if result.instance is not None:
            replay = str(dump_instance(out_dir / "failures" / f"{name.value}-{result.instance_id}.json", *result.instance))
        for reason in reasons:
            report.failures.append(f"{result.instance_id}: {reason}")
            safe_log_event(RunLogger.log_failure, result.instance_id, reason, replay)
    if name == SuiteName.SCALING:
        _finalize_scaling(report)
        for check in report.checks:
            if check.check == "scaling-slope" and not check.passed:
                report.failures.append(f"{check.instance_id}: slope {check.value:.4f} outside [0.85, 1.15]")

    if report.sweep:
        report.artifacts.append(str(write_csv(sweep_frame(report.sweep), out_dir / f"{name.value}.csv")))
    checks_path = write_csv(checks_frame(report.checks), out_dir / f"{name.value}-checks.csv")
    report.artifacts.append(str(checks_path))
    safe_log_event(RunLogger.log_suite, name.value, report.passed, len(results), len(report.failures))
    meta = write_meta(out_dir / f"{name.value}.csv", config.model_dump(mode="json"), started, RunLogger.drain())
    report.artifacts.append(str(meta))
    return report


async def run_suite_async(config: ExperimentConfig) -> List[SuiteReport]:
    name = config.suite or SuiteName.ACCEPTANCE
    if name != SuiteName.ACCEPTANCE:
        return [await run_named_suite(name, config)]
    reports = []
    for member in SuiteName:
        if member != SuiteName.ACCEPTANCE:
            reports.append(await run_named_suite(member, config))
    return reports


def run_suite(config: ExperimentConfig) -> int:
    """Run the configured suite; the exit code is nonzero iff some check failed"""
    reports = asyncio.run(run_suite_async(config))
    for report in reports:
        status = "passed" if report.passed else f"failed ({len(report.failures)} failures)"
        logger.info(f"Suite {report.name} {status}")
    return 0 if all(report.passed for report in reports) else 1
