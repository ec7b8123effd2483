import itertools
import json
import logging
import math
from collections import Counter
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from config import MAX_BASIS
from models.detection import DetectionModel, DetectionResult
from models.errors import InvalidNetworkError, NoCollisionError, PreconditionError, ScaleExceededError
from models.flow import Flow
from models.kdist import KDistGraph, KDistInstance
from models.network import ElectricNetwork, MarkedSet, Partition, SourceDistribution
from models.walk import WalkParams, WalkSpace
from schemas.graph_file import KDistInstanceFile
from utils.detector import detect
from utils.electric import check_flow
from utils.walk_builder import build_space, oriented_flow

logger = logging.getLogger(__name__)


def subset_type(subset: Iterable[int], x: Sequence[int], k: int) -> Tuple[int, ...]:
    """tau_i = number of values that occur exactly i times among x restricted to subset"""
    tau = [0] * k
    for count in Counter(x[j] for j in subset).values():
        if count <= k:
            tau[count - 1] += 1
    return tuple(tau)


def validate_instance(x: Sequence[int], k: int = 3, r: Sequence[int] = (1, 1)) -> List[str]:
    try:
        KDistInstance(x=tuple(x), k=k, r=tuple(r))
    except ValidationError as e:
        return [err["msg"] for err in e.errors()]
    return []


def _enumerate_level(instance: KDistInstance, level: int) -> List[FrozenSet[int]]:
    tau = instance.level_type(level)
    size = sum((i + 1) * count for i, count in enumerate(tau))
    if size > instance.n:
        return []
    return [
        frozenset(subset)
        for subset in itertools.combinations(range(instance.n), size)
        if subset_type(subset, instance.x, instance.k) == tau
    ]


def build_kdist_graph(instance: KDistInstance, max_basis: int = MAX_BASIS) -> KDistGraph:
    """Unit-weight walk graph on V_0..V_k plus dead-ends, marked set V_k"""
    k, n = instance.k, instance.n
    levels = [_enumerate_level(instance, level) for level in range(k + 1)]
    if not levels[0]:
        raise PreconditionError(
            f"no subset of x has type {instance.base_type}, pad x with enough (k-1)-collisions"
        )

    ids: Dict[FrozenSet[int], int] = {}
    for members in levels:
        for subset in members:
            ids[subset] = len(ids)
    level_index = {subset: level for level, members in enumerate(levels) for subset in members}

    edges: List[Tuple[int, int, float]] = []
    deadends: List[Tuple[FrozenSet[int], int]] = []
    for level in range(k):
        for subset in levels[level]:
            for j in range(n):
                neighbour = subset ^ {j}
                if neighbour in level_index:
                    # each V-edge is stored once, from its lower endpoint
                    if level_index[neighbour] > level:
                        edges.append((ids[subset], ids[neighbour], 1.0))
                else:
                    deadends.append((subset, j))

    vertices = len(ids) + len(deadends)
    if vertices > max_basis:
        raise ScaleExceededError(vertices, max_basis)
    for offset, (subset, _) in enumerate(deadends):
        edges.append((ids[subset], len(ids) + offset, 1.0))

    part_a = {ids[s] for level, members in enumerate(levels) if level % 2 == 0 for s in members}
    part_a |= {len(ids) + offset for offset, (s, _) in enumerate(deadends) if level_index[s] % 2 == 1}
    network = ElectricNetwork(
        vertices=vertices,
        edges=edges,
        partition=Partition(A=frozenset(part_a), B=frozenset(range(vertices)) - frozenset(part_a))
    )
    logger.info(
        f"k-distinctness graph for n={n}: levels {[len(m) for m in levels]}, "
        f"{len(deadends)} dead-ends, {len(edges)} edges"
    )
    return KDistGraph(
        instance=instance,
        levels=tuple(tuple(members) for members in levels),
        deadends=tuple(deadends),
        ids=ids,
        network=network,
        sigma=SourceDistribution.uniform(ids[s] for s in levels[0]),
        marked=MarkedSet(marked=frozenset(ids[s] for s in levels[k]))
    )


def level_sizes(graph: KDistGraph) -> List[int]:
    return [len(members) for members in graph.levels]


def preimage_counts(graph: KDistGraph) -> Dict[int, List[int]]:
    """For every S in V_i, i >= 1, the number of S_0 in V_0 with S minus S_0 an i-collision"""
    x = graph.instance.x
    counts: Dict[int, List[int]] = {}
    for level in range(1, graph.level_count):
        row = []
        for subset in graph.levels[level]:
            row.append(sum(
                1 for base in graph.levels[0]
                if base <= subset and len(subset - base) == level and len({x[j] for j in subset - base}) == 1
            ))
        counts[level] = row
    return counts


def _base_outside_collision(graph: KDistGraph) -> List[FrozenSet[int]]:
    collision = graph.instance.collision
    if collision is None:
        raise NoCollisionError(f"x = {list(graph.instance.x)} has no {graph.instance.k}-collision")
    bases = [s for s in graph.levels[0] if s.isdisjoint(collision)]
    if not bases:
        raise NoCollisionError("every subset of V_0 meets the collision, no flow path exists")
    return bases


def restricted_distribution(graph: KDistGraph) -> SourceDistribution:
    """Uniform distribution on the V_0 subsets disjoint from the collision"""
    return SourceDistribution.uniform(graph.ids[s] for s in _base_outside_collision(graph))


def kdist_flow(graph: KDistGraph) -> Flow:
    """Each S_0 disjoint from the collision sends 1/|V_0'| along S_0 + a_1, + a_2, ..., + a_k"""
    collision = graph.instance.collision
    bases = _base_outside_collision(graph)
    edge_index = {(u, v): index for index, (u, v, _) in enumerate(graph.network.edges)}
    values = np.zeros(graph.network.edge_count)
    share = 1.0 / len(bases)
    for base in bases:
        current = base
        for a in collision:
            following = current | {a}
            values[edge_index[(graph.ids[current], graph.ids[following])]] += share
            current = following
    return Flow(values=values)


def level_psi(graph: KDistGraph, vertex: int, c1: float, space: Optional[WalkSpace] = None) -> np.ndarray:
    """Level-based psi: V_0 gets (1/sqrt(C1))|u> plus its edges, other levels and dead-ends their edges, V_k nothing"""
    network = graph.network
    space = space or build_space(network, graph.sigma)
    psi = np.zeros(space.dimension)
    level = graph.level_of(vertex)
    if level == graph.instance.k:
        return psi
    if level == 0:
        psi[space.vertex_index(vertex)] = 1.0 / math.sqrt(c1)
    for e in network.incidence[vertex]:
        psi[space.edge_index(e)] = 1.0
    return psi


def walk_params(graph: KDistGraph, params: WalkParams) -> WalkParams:
    """R = 1/|V_0|, which turns the standard psi into the level-based one"""
    return params.with_resistance(1.0 / len(graph.levels[0]))


def kdist_negative_witness_norm(graph: KDistGraph, params: WalkParams) -> float:
    """|w| = sqrt(1 + C1 |E| / |V_0|)"""
    return math.sqrt(1.0 + params.c1 * graph.network.edge_count / len(graph.levels[0]))


def kdist_positive_witness(graph: KDistGraph, params: WalkParams) -> Tuple[np.ndarray, WalkSpace]:
    """phi from kdist_flow, in the walk space of the uniform distribution on V_0"""
    flow = kdist_flow(graph)
    restricted = restricted_distribution(graph)
    check_flow(flow, graph.network, restricted, graph.marked, tolerance=1e-12)

    space = build_space(graph.network, graph.sigma)
    resistance = 1.0 / len(restricted.sigma)
    phi = np.zeros(space.dimension)
    for u, p in restricted.sigma.items():
        phi[space.vertex_index(u)] = math.sqrt(params.c1 * resistance * p)
    phi[len(space.sources):] = -oriented_flow(flow, graph.network)
    return phi, space


def kdist_detect(
        instance: KDistInstance,
        params: WalkParams,
        model: Union[DetectionModel, str] = DetectionModel.IDEAL,
        max_basis: int = MAX_BASIS
) -> DetectionResult:
    """Detection with the level-based psi and precision 1/(C2 |w|)"""
    graph = build_kdist_graph(instance, max_basis)
    run_params = walk_params(graph, params)
    theta = 1.0 / (params.c2 * kdist_negative_witness_norm(graph, params))
    return detect(
        graph.network,
        graph.sigma,
        graph.marked,
        run_params,
        model,
        theta=theta,
        check_resistance=False,
        max_basis=max_basis
    )


def padded_positive(n: int) -> Tuple[int, ...]:
    """One triple, then pairs of fresh values, then a final single when n is even"""
    if n < 6:
        raise PreconditionError(f"a positive padded instance needs n >= 6, got {n}")
    x = [1, 1, 1]
    value = 2
    while len(x) + 2 <= n:
        x.extend([value, value])
        value += 1
    if len(x) < n:
        x.append(value)
    return tuple(x)


def padded_negative(n: int) -> Tuple[int, ...]:
    """Pairs of fresh values, then a final single when n is odd"""
    if n < 2:
        raise PreconditionError(f"a negative padded instance needs n >= 2, got {n}")
    x: List[int] = []
    value = 1
    while len(x) + 2 <= n:
        x.extend([value, value])
        value += 1
    if len(x) < n:
        x.append(value)
    return tuple(x)


def load_kdist_instance(path: Union[str, Path]) -> KDistInstance:
    path = Path(path)
    try:
        raw = KDistInstanceFile.model_validate(json.loads(path.read_text()))
        return KDistInstance(x=tuple(raw.x), k=raw.k, r=tuple(raw.r))
    except OSError as e:
        raise InvalidNetworkError(f"cannot read instance file: {e}", str(path))
    except (ValidationError, ValueError) as e:
        raise InvalidNetworkError(f"malformed instance file: {e}", str(path))
