import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import linalg

from config import EIGENPHASE_TOLERANCE, MAX_BASIS, STATE_NORM_TOLERANCE
from models.errors import BoundViolationError, OutputError, PreconditionError, ScaleExceededError
from models.flow import Flow
from models.network import ElectricNetwork, MarkedSet, SourceDistribution
from models.walk import WalkOperator, WalkParams, WalkSpace
from utils.electric import check_flow, flow_energy
from utils.network_ops import total_weight

logger = logging.getLogger(__name__)


def check_walk_preconditions(graph: ElectricNetwork, sigma: SourceDistribution) -> None:
    if graph.partition is None:
        raise PreconditionError("walk needs a bipartite network with an explicit partition")
    outside = [u for u in sigma.support if u not in graph.partition.A]
    if outside:
        raise PreconditionError(f"support of sigma is not contained in part A: {outside}")


def build_space(graph: ElectricNetwork, sigma: SourceDistribution, max_basis: int = MAX_BASIS) -> WalkSpace:
    sources = tuple(sigma.support)
    dimension = len(sources) + graph.edge_count
    if dimension > max_basis:
        raise ScaleExceededError(dimension, max_basis)
    offset = len(sources)
    local: Dict[int, Tuple[int, ...]] = {}
    for u in range(graph.vertices):
        indices = [sources.index(u)] if u in sigma.sigma else []
        indices.extend(offset + e for e in graph.incidence[u])
        local[u] = tuple(indices)
    return WalkSpace(sources=sources, edges=tuple((u, v) for u, v, _ in graph.edges), local=local)


def build_psi(
        u: int,
        graph: ElectricNetwork,
        sigma: SourceDistribution,
        params: WalkParams,
        space: Optional[WalkSpace] = None
) -> np.ndarray:
    """psi_u = sqrt(sigma_u / (C1 R)) |u> + sum_{uv} sqrt(w_uv) |uv>, as a full-space vector"""
    space = space or build_space(graph, sigma)
    psi = np.zeros(space.dimension)
    if u in sigma.sigma:
        psi[space.vertex_index(u)] = math.sqrt(sigma.get(u) / (params.c1 * params.resistance))
    for e in graph.incidence[u]:
        psi[space.edge_index(e)] = math.sqrt(graph.edges[e][2])
    return psi


def _local_block(
        u: int,
        graph: ElectricNetwork,
        sigma: SourceDistribution,
        marked: MarkedSet,
        params: WalkParams,
        space: WalkSpace
) -> Tuple[List[int], np.ndarray]:
    """Indices of H_u and the +1 eigenprojector of D_u restricted to them"""
    indices = list(space.local[u])
    block = np.eye(len(indices))
    if u not in marked and indices:
        psi = build_psi(u, graph, sigma, params, space)[indices]
        block -= np.outer(psi, psi) / (psi @ psi)
    return indices, block


def local_projector(
        u: int,
        graph: ElectricNetwork,
        sigma: SourceDistribution,
        marked: MarkedSet,
        params: WalkParams,
        space: WalkSpace
) -> np.ndarray:
    """Projector onto the +1 eigenspace of D_u, zero outside H_u"""
    projector = np.zeros((space.dimension, space.dimension))
    indices, block = _local_block(u, graph, sigma, marked, params, space)
    projector[np.ix_(indices, indices)] = block
    return projector


def local_reflection(
        u: int,
        graph: ElectricNetwork,
        sigma: SourceDistribution,
        marked: MarkedSet,
        params: WalkParams,
        space: Optional[WalkSpace] = None
) -> np.ndarray:
    """D_u extended by identity outside H_u"""
    space = space or build_space(graph, sigma)
    reflection = np.eye(space.dimension)
    if u in marked:
        return reflection
    psi = build_psi(u, graph, sigma, params, space)
    norm_sq = psi @ psi
    if norm_sq > 0:
        reflection -= 2.0 * np.outer(psi, psi) / norm_sq
    return reflection


def projectors(
        graph: ElectricNetwork,
        sigma: SourceDistribution,
        marked: MarkedSet,
        params: WalkParams,
        space: Optional[WalkSpace] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Pi_A and Pi_B; Pi_B keeps the source states since R_B fixes them"""
    space = space or build_space(graph, sigma)
    projector_a = np.zeros((space.dimension, space.dimension))
    projector_b = np.zeros((space.dimension, space.dimension))
    for u in range(graph.vertices):
        indices, block = _local_block(u, graph, sigma, marked, params, space)
        target = projector_a if u in graph.partition.A else projector_b
        target[np.ix_(indices, indices)] += block
    for i in range(len(space.sources)):
        projector_b[i, i] = 1.0
    return projector_a, projector_b


def build_walk_operator(
        graph: ElectricNetwork,
        sigma: SourceDistribution,
        marked: MarkedSet,
        params: WalkParams,
        max_basis: int = MAX_BASIS
) -> WalkOperator:
    check_walk_preconditions(graph, sigma)
    space = build_space(graph, sigma, max_basis)
    projector_a, projector_b = projectors(graph, sigma, marked, params, space)
    identity = np.eye(space.dimension)
    reflection_a = 2.0 * projector_a - identity
    reflection_b = 2.0 * projector_b - identity
    unitary = reflection_b @ reflection_a

    if space.dimension:
        # U is normal, so the complex Schur form is diagonal and Z is an orthonormal eigenbasis
        triangular, eigenvectors = linalg.schur(unitary.astype(complex), output="complex")
        phases = np.angle(np.diag(triangular))
    else:
        eigenvectors, phases = np.zeros((0, 0), dtype=complex), np.zeros(0)

    logger.debug(f"Built walk operator of dimension {space.dimension} for {graph.vertices} vertices")
    return WalkOperator(
        space=space,
        reflection_a=reflection_a,
        reflection_b=reflection_b,
        projector_a=projector_a,
        projector_b=projector_b,
        unitary=unitary,
        phases=phases,
        eigenvectors=eigenvectors
    )


def oriented_flow(flow: Flow, graph: ElectricNetwork) -> np.ndarray:
    """Flow values re-signed so every edge points from A to B"""
    signs = np.array([1.0 if u in graph.partition.A else -1.0 for u, _, _ in graph.edges])
    return flow.values * signs if graph.edge_count else np.zeros(0)


def positive_witness(
        graph: ElectricNetwork,
        sigma: SourceDistribution,
        marked: MarkedSet,
        params: WalkParams,
        flow: Flow,
        space: Optional[WalkSpace] = None
) -> np.ndarray:
    """phi = sqrt(C1 R) sum_S sqrt(sigma_u)|u> - sum_e (p_e / sqrt(w_e))|e>, eigenvalue 1 for U"""
    check_walk_preconditions(graph, sigma)
    if not marked:
        raise PreconditionError("positive witness needs a nonempty marked set")
    overlap = [u for u in sigma.support if u in marked]
    if overlap:
        raise PreconditionError(f"sources {overlap} are marked, the walk is never run")
    check_flow(flow, graph, sigma, marked)

    space = space or build_space(graph, sigma)
    phi = math.sqrt(params.c1 * params.resistance) * space.source_state(sigma)
    if graph.edge_count:
        phi[len(space.sources):] = -oriented_flow(flow, graph) / np.sqrt(graph.weights)
    return phi


def negative_witness(
        graph: ElectricNetwork,
        sigma: SourceDistribution,
        params: WalkParams,
        space: Optional[WalkSpace] = None
) -> np.ndarray:
    """w with Pi_A w = 0, Pi_B w = varsigma and |w|^2 = 1 + C1 R W"""
    check_walk_preconditions(graph, sigma)
    space = space or build_space(graph, sigma)
    w = space.source_state(sigma)
    if graph.edge_count:
        w[len(space.sources):] = math.sqrt(params.c1 * params.resistance) * np.sqrt(graph.weights)
    return w


def effective_gap_check(op: WalkOperator, w: np.ndarray, theta: float) -> Tuple[float, float]:
    """Return (|P_theta Pi_B w|, theta/2 |w|) for w in the kernel of Pi_A"""
    norm = float(np.linalg.norm(w))
    if np.linalg.norm(op.projector_a @ w) > STATE_NORM_TOLERANCE * max(1.0, norm):
        raise PreconditionError("vector is not in the kernel of Pi_A")
    projected = op.projector_b @ w
    keep = np.abs(op.phases) <= theta + EIGENPHASE_TOLERANCE
    components = op.eigenvectors[:, keep].conj().T @ projected
    return float(np.linalg.norm(components)), theta / 2.0 * norm


def check_rw_lower_bound(
        graph: ElectricNetwork,
        sigma: SourceDistribution,
        marked: MarkedSet,
        flow: Flow
) -> float:
    """R W with R the energy of flow; R W >= (sum_e |p_e|)^2 >= 1"""
    if not marked:
        raise PreconditionError("marked set is empty")
    overlap = [u for u in sigma.support if u in marked]
    if overlap:
        raise PreconditionError(f"sources {overlap} are marked")
    check_flow(flow, graph, sigma, marked)

    product = flow_energy(flow, graph) * total_weight(graph)
    carried = float(np.sum(np.abs(flow.values))) ** 2
    if product < carried - 1e-9 or carried < 1 - 1e-9:
        raise BoundViolationError(f"R W = {product:.12g} violates R W >= {carried:.12g} >= 1")
    return product


def commutator_norm(first: np.ndarray, second: np.ndarray) -> float:
    return float(np.linalg.norm(first @ second - second @ first, 2))


def export_matrix(
        path: Union[str, Path],
        matrix: np.ndarray,
        space: WalkSpace
) -> Path:
    """Dense row-major text with the basis labels as header"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(path, np.real_if_close(matrix), fmt="%.15g", header=" ".join(space.labels))
    except OSError as e:
        raise OutputError(f"cannot write matrix: {e}", str(path))
    return path
