import logging
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np
from scipy import linalg

from config import FLOW_TOLERANCE
from models.errors import DisconnectedSourceError, InvalidFlowError, InvalidParameterError, PreconditionError
from models.flow import Flow
from models.network import ElectricNetwork, MarkedSet, SourceDistribution
from utils.network_ops import check_compatible, stationary_distribution, to_networkx, total_weight

logger = logging.getLogger(__name__)


def _grounded_vertices(graph: ElectricNetwork, sigma: SourceDistribution, marked: MarkedSet) -> List[int]:
    """Unmarked vertices in components that contain a marked vertex.

    Raises when a source vertex sits in a component with no marked vertex.
    """
    if not marked:
        raise PreconditionError("marked set is empty")
    check_compatible(graph, sigma, marked)

    grounded, stranded = [], []
    for component in nx.connected_components(to_networkx(graph)):
        if any(u in marked for u in component):
            grounded.extend(u for u in component if u not in marked)
        else:
            stranded.extend(u for u in component if sigma.get(u) > 0)
    if stranded:
        raise DisconnectedSourceError(stranded)
    return sorted(grounded)


def _solve_grounded(graph: ElectricNetwork, free: List[int], rhs: np.ndarray) -> np.ndarray:
    """Solve L_FF x = rhs_F with every other vertex held at 0"""
    solution = np.zeros(graph.vertices)
    if free:
        lap = graph.laplacian[np.ix_(free, free)]
        solution[free] = linalg.solve(lap, rhs[free], assume_a="pos")
    return solution


def potentials(graph: ElectricNetwork, sigma: SourceDistribution, marked: MarkedSet) -> np.ndarray:
    """Vertex potentials of the electric flow, with M grounded at 0"""
    free = _grounded_vertices(graph, sigma, marked)
    return _solve_grounded(graph, free, sigma.as_vector(graph.vertices))


def electric_flow(graph: ElectricNetwork, sigma: SourceDistribution, marked: MarkedSet) -> Flow:
    """Unique energy-minimizing flow from sigma to M.

    p_uv = w_uv (phi_u - phi_v) for the grounded potentials phi.
    """
    phi = potentials(graph, sigma, marked)
    values = np.array([w * (phi[u] - phi[v]) for u, v, w in graph.edges], dtype=float)
    return Flow(values=values)


def flow_energy(flow: Flow, graph: ElectricNetwork) -> float:
    if flow.values.shape != (graph.edge_count,):
        raise InvalidParameterError(
            f"flow has {flow.values.shape[0]} values, network has {graph.edge_count} edges"
        )
    if not graph.edge_count:
        return 0.0
    return float(np.sum(flow.values ** 2 / graph.weights))


def effective_resistance(graph: ElectricNetwork, sigma: SourceDistribution, marked: MarkedSet) -> float:
    return flow_energy(electric_flow(graph, sigma, marked), graph)


def check_flow(
        flow: Flow,
        graph: ElectricNetwork,
        sigma: SourceDistribution,
        marked: MarkedSet,
        tolerance: float = FLOW_TOLERANCE
) -> float:
    """Return the conservation residual, raising when it exceeds tolerance"""
    residual = flow.max_residual(graph, sigma, marked)
    if residual > tolerance:
        raise InvalidFlowError(residual)
    return residual


def hitting_time(graph: ElectricNetwork, sigma: SourceDistribution, marked: MarkedSet) -> float:
    """Expected number of random-walk steps from sigma until M is reached.

    h = 0 on M and L_UU h_U = d_U on the rest, which is the first-step
    recursion h_u = 1 + sum_v (w_uv / d_u) h_v multiplied through by d_u.
    """
    free = _grounded_vertices(graph, sigma, marked)
    h = _solve_grounded(graph, free, graph.weighted_degrees)
    reachable = set(free) | set(marked.marked)
    return float(sum(p * h[u] for u, p in sigma.sigma.items() if u in reachable))


def commute_time(graph: ElectricNetwork, s: int, t: int) -> float:
    if s == t:
        raise InvalidParameterError(f"commute time needs two distinct vertices, got {s} twice")
    forward = hitting_time(graph, SourceDistribution.point_mass(s), MarkedSet.of(t))
    backward = hitting_time(graph, SourceDistribution.point_mass(t), MarkedSet.of(s))
    return forward + backward


def reversed_network(graph: ElectricNetwork) -> ElectricNetwork:
    """Same network with every stored edge orientation flipped"""
    return ElectricNetwork(
        vertices=graph.vertices,
        edges=[(v, u, w) for u, v, w in graph.edges],
        partition=graph.partition
    )


def random_circulation(
        graph: ElectricNetwork,
        marked: MarkedSet,
        rng: np.random.Generator,
        scale: float = 1.0
) -> Flow:
    """Random edge flow with zero net outflow at every unmarked vertex.

    Adding it to a valid flow keeps conservation intact.
    """
    unmarked = [u for u in range(graph.vertices) if u not in marked]
    if not graph.edge_count:
        return Flow.zero(graph)
    rows = graph.incidence_matrix[unmarked] if unmarked else np.zeros((0, graph.edge_count))
    basis = linalg.null_space(rows) if rows.shape[0] else np.eye(graph.edge_count)
    if basis.shape[1] == 0:
        return Flow.zero(graph)
    return Flow(values=scale * basis @ rng.standard_normal(basis.shape[1]))


def flow_to_records(flow: Flow, graph: ElectricNetwork) -> List[Tuple[int, int, float]]:
    return [(u, v, float(p)) for (u, v, _), p in zip(graph.edges, flow.values)]


def commute_identity_errors(
        graph: ElectricNetwork,
        s: int,
        t: int,
        marked: Optional[MarkedSet] = None
) -> Dict[str, float]:
    """Relative errors of commute time = 2WR_st and H_pi,M = 2WR_pi,M"""
    weight = total_weight(graph)
    pair = effective_resistance(graph, SourceDistribution.point_mass(s), MarkedSet.of(t))
    expected = 2 * weight * pair
    errors = {"commute": abs(commute_time(graph, s, t) - expected) / expected}
    if marked is not None:
        pi = stationary_distribution(graph)
        expected = 2 * weight * effective_resistance(graph, pi, marked)
        errors["stationary"] = abs(hitting_time(graph, pi, marked) - expected) / expected
    logger.debug(f"Commute identity errors for ({s}, {t}): {errors}")
    return errors
