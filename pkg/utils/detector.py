import logging
import math
from typing import Optional, Tuple, Union

import numpy as np

from config import EIGENPHASE_TOLERANCE, MAX_BASIS, STATE_NORM_TOLERANCE
from models.detection import DetectionModel, DetectionResult, SampleSummary
from models.errors import (
    BoundViolationError, InvalidParameterError, PreconditionError, UnnormalizedStateError
)
from models.network import ElectricNetwork, MarkedSet, SourceDistribution
from models.walk import WalkOperator, WalkParams
from utils.electric import effective_resistance
from utils.network_ops import check_compatible, prepare_bipartite, total_weight
from utils.walk_builder import build_walk_operator

logger = logging.getLogger(__name__)


def measure_support_marked(
        sigma: SourceDistribution,
        marked: MarkedSet
) -> Tuple[float, Optional[SourceDistribution]]:
    """Probability that the start state lies on M, and the collapsed distribution otherwise"""
    p_marked = sum(p for u, p in sigma.sigma.items() if u in marked)
    remaining = {u: p for u, p in sigma.sigma.items() if u not in marked}
    if not remaining:
        return 1.0, None
    if p_marked == 0:
        return 0.0, sigma
    scale = sum(remaining.values())
    return float(p_marked), SourceDistribution(sigma={u: p / scale for u, p in remaining.items()})


def ancilla_count(delta: float) -> int:
    return max(0, math.ceil(math.log2(1.0 / delta)))


def zero_bucket_probability(theta, t: int):
    """Probability that t-bit phase estimation on eigenphase theta reads bucket 0"""
    size = 2 ** t
    theta = np.asarray(theta, dtype=float)
    half = np.sin(theta / 2.0)
    flat = np.abs(half) < 1e-12
    safe = np.where(flat, 1.0, half)
    kernel = (np.sin(size * theta / 2.0) / (size * safe)) ** 2
    result = np.where(flat, 1.0, kernel)
    return float(result) if result.ndim == 0 else result


def qpe_accept_probability(
        op: WalkOperator,
        state: np.ndarray,
        delta: float,
        model: Union[DetectionModel, str] = DetectionModel.IDEAL
) -> float:
    model = DetectionModel.parse(model)
    norm = float(np.linalg.norm(state))
    if abs(norm - 1.0) > STATE_NORM_TOLERANCE:
        raise UnnormalizedStateError(norm)
    if not 0 < delta < math.pi:
        raise InvalidParameterError(f"precision {delta} must lie in (0, pi)")

    weights = op.overlaps(state)
    if model == DetectionModel.IDEAL:
        accepted = weights[np.abs(op.phases) <= delta + EIGENPHASE_TOLERANCE].sum()
    else:
        accepted = weights @ zero_bucket_probability(op.phases, ancilla_count(delta))
    return float(min(1.0, max(0.0, accepted)))


def collapsed_params(params: WalkParams, p_marked: float) -> WalkParams:
    """R / (1 - p)^2 bounds the resistance of the collapsed distribution"""
    if p_marked <= 0:
        return params
    return params.with_resistance(params.resistance / (1.0 - p_marked) ** 2)


def detect(
        graph: ElectricNetwork,
        sigma: SourceDistribution,
        marked: MarkedSet,
        params: WalkParams,
        model: Union[DetectionModel, str] = DetectionModel.IDEAL,
        theta: Optional[float] = None,
        check_resistance: bool = True,
        max_basis: int = MAX_BASIS
) -> DetectionResult:
    """Accept probability of the detection algorithm, computed exactly.

    The start state is first measured against M; if it survives, phase
    estimation runs on the walk for the collapsed distribution, with the
    resistance bound scaled by 1/(1 - p_marked)^2. Precision uses W of the
    input graph even when the walk runs on its double. theta overrides the
    precision derived from params.
    """
    model = DetectionModel.parse(model)
    check_compatible(graph, sigma, marked)

    if marked and check_resistance:
        actual = effective_resistance(graph, sigma, marked)
        if params.resistance < actual * (1 - 1e-9):
            raise PreconditionError(
                f"resistance bound {params.resistance:.6g} is below R = {actual:.6g}"
            )

    prepared = prepare_bipartite(graph, sigma, marked)
    # precision and step count follow the input graph's W, not the doubled one
    weight = total_weight(graph)
    p_marked, collapsed = measure_support_marked(prepared.sigma, prepared.marked)
    walk_params = collapsed_params(params, p_marked) if collapsed is not None else params
    delta = theta if theta is not None else walk_params.theta(weight)
    common = dict(
        theta_used=delta,
        model=model,
        doubled=prepared.doubled,
        total_weight=weight,
        walk_weight=total_weight(prepared.network),
        resistance_bound=params.resistance,
        walk_resistance=walk_params.resistance
    )

    if collapsed is None:
        logger.info("Start state lies entirely on marked vertices, accepting without a walk")
        return DetectionResult(
            early_accept_prob=1.0, phase_accept_prob=0.0, total_accept_prob=1.0, steps=0, **common
        )

    op = build_walk_operator(prepared.network, collapsed, prepared.marked, walk_params, max_basis)
    state = op.space.source_state(collapsed)
    phase = qpe_accept_probability(op, state, delta, model)
    if model == DetectionModel.IDEAL:
        steps, ancillas = math.ceil(1.0 / delta), None
    else:
        ancillas = ancilla_count(delta)
        steps = 2 ** ancillas

    total = p_marked + (1 - p_marked) * phase
    logger.debug(f"Detection on {graph.vertices} vertices: accept {total:.6f} after {steps} steps")
    return DetectionResult(
        early_accept_prob=p_marked,
        phase_accept_prob=phase,
        total_accept_prob=total,
        steps=steps,
        ancillas=ancillas,
        dimension=op.dimension,
        **common
    )


def collapse_resistance_check(graph: ElectricNetwork, sigma: SourceDistribution, marked: MarkedSet) -> float:
    """R_{sigma',M} / R_{sigma,M} after the start state survives the marked measurement"""
    if not marked:
        raise PreconditionError("marked set is empty")
    p_marked, collapsed = measure_support_marked(sigma, marked)
    if p_marked >= 2.0 / 3.0:
        raise PreconditionError(f"marked probability {p_marked:.6g} is not below 2/3")
    if p_marked == 0:
        return 1.0
    ratio = effective_resistance(graph, collapsed, marked) / effective_resistance(graph, sigma, marked)
    if ratio > 9 + 1e-9:
        raise BoundViolationError(f"collapsed resistance grew by {ratio:.6g}, more than 9")
    return ratio


def sample_detection(result: DetectionResult, shots: int, seed: int) -> SampleSummary:
    """Bernoulli accept/reject draws at the exact acceptance probability"""
    if shots <= 0:
        raise InvalidParameterError(f"shots must be positive, got {shots}")
    rng = np.random.default_rng(seed)
    accepted = int(np.count_nonzero(rng.random(shots) < result.total_accept_prob))
    return SampleSummary(shots=shots, accepted=accepted, frequency=accepted / shots, seed=seed)


def working_precision(
        graph: ElectricNetwork,
        sigma: SourceDistribution,
        params: WalkParams,
        max_basis: int = MAX_BASIS
) -> float:
    """Smallest eigenphase magnitude at which the start state's spectral mass exceeds 1/3.

    Any ideal-threshold precision below it keeps acceptance on this
    unmarked instance at most 1/3.
    """
    prepared = prepare_bipartite(graph, sigma, MarkedSet())
    op = build_walk_operator(prepared.network, prepared.sigma, prepared.marked, params, max_basis)
    weights = op.overlaps(op.space.source_state(prepared.sigma))
    magnitudes = np.abs(op.phases)
    order = np.argsort(magnitudes, kind="stable")
    cumulative = np.cumsum(weights[order])
    crossing = int(np.argmax(cumulative > 1.0 / 3.0))
    return float(magnitudes[order][crossing])


def step_bound(params: WalkParams, total_weight_value: float) -> int:
    return math.ceil(params.c * math.sqrt(params.resistance * total_weight_value))
