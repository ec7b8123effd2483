import logging
from typing import Optional, Tuple, Union

import networkx as nx
import numpy as np

from models.errors import InvalidParameterError
from models.kdist import KDistInstance
from models.network import ElectricNetwork, MarkedSet, SourceDistribution
from schemas.experiment import Family, GeneratorParams
from utils.kdistinctness import build_kdist_graph, padded_negative, padded_positive
from utils.learning_compiler import LearningGraphCompiler, star_graph, unit_vectors
from utils.network_ops import prepare_bipartite

logger = logging.getLogger(__name__)

Instance = Tuple[ElectricNetwork, SourceDistribution, MarkedSet]


def _from_networkx(graph: nx.Graph) -> ElectricNetwork:
    """Unit-weight network on the sorted node labels, edges sorted by endpoint ids"""
    index = {node: i for i, node in enumerate(sorted(graph.nodes))}
    pairs = sorted((min(index[a], index[b]), max(index[a], index[b])) for a, b in graph.edges)
    return ElectricNetwork(vertices=len(index), edges=[(u, v, 1.0) for u, v in pairs])


def _marked(target: int, positive: bool) -> MarkedSet:
    return MarkedSet.of(target) if positive else MarkedSet()


def path_instance(length: int, positive: bool = True) -> Instance:
    """Path 0-1-...-L with sigma at 0 and L marked"""
    if length < 1:
        raise InvalidParameterError(f"path length must be at least 1, got {length}")
    graph = _from_networkx(nx.path_graph(length + 1))
    return graph, SourceDistribution.point_mass(0), _marked(length, positive)


def cycle_instance(n: int, positive: bool = True) -> Instance:
    if n < 3:
        raise InvalidParameterError(f"cycle needs at least 3 vertices, got {n}")
    graph = _from_networkx(nx.cycle_graph(n))
    return graph, SourceDistribution.point_mass(0), _marked(n // 2, positive)


def grid_instance(rows: int, cols: int, positive: bool = True) -> Instance:
    """Corner to opposite corner on a rows x cols grid"""
    if rows * cols < 2:
        raise InvalidParameterError(f"grid {rows}x{cols} has fewer than 2 vertices")
    graph = _from_networkx(nx.grid_2d_graph(rows, cols))
    return graph, SourceDistribution.point_mass(0), _marked(rows * cols - 1, positive)


def star_instance(leaves: int, positive: bool = True) -> Instance:
    if leaves < 1:
        raise InvalidParameterError(f"star needs at least one leaf, got {leaves}")
    graph = _from_networkx(nx.star_graph(leaves))
    return graph, SourceDistribution.point_mass(0), _marked(leaves, positive)


def complete_instance(n: int, positive: bool = True) -> Instance:
    if n < 2:
        raise InvalidParameterError(f"complete graph needs at least 2 vertices, got {n}")
    graph = _from_networkx(nx.complete_graph(n))
    return graph, SourceDistribution.point_mass(0), _marked(n - 1, positive)


def random_weighted_instance(
        n: int,
        seed: int,
        edge_probability: float = 0.4,
        min_weight: float = 0.5,
        max_weight: float = 2.0,
        positive: bool = True
) -> Instance:
    """Connected random graph: a random spanning tree plus independent extra edges.

    The seed alone determines the instance.
    """
    if n < 2:
        raise InvalidParameterError(f"random graph needs at least 2 vertices, got {n}")
    rng = np.random.default_rng(seed)
    pairs = {(int(rng.integers(0, i)), i) for i in range(1, n)}
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in pairs and rng.random() < edge_probability:
                pairs.add((u, v))
    pairs = sorted(pairs)
    weights = rng.uniform(min_weight, max_weight, size=len(pairs))
    graph = ElectricNetwork(vertices=n, edges=[(u, v, float(w)) for (u, v), w in zip(pairs, weights)])
    target = int(rng.integers(1, n))
    return graph, SourceDistribution.point_mass(0), _marked(target, positive)


def learning_or_instance(n: int, positive: bool = True) -> Instance:
    compiler = LearningGraphCompiler(star_graph(n, "or"))
    x = unit_vectors(n)[-1] if positive else (0,) * n
    compiled = compiler.compile(x)
    return compiled.network, compiled.sigma, compiled.marked


def kdist_instance(n: int, positive: bool = True) -> Instance:
    x = padded_positive(n) if positive else padded_negative(n)
    graph = build_kdist_graph(KDistInstance(x=x, k=3, r=(1, 1)))
    return graph.network, graph.sigma, graph.marked


def generate(
        family: Union[Family, str],
        params: Optional[GeneratorParams] = None,
        seed: int = 0
) -> Instance:
    """Deterministic instance of a family, doubled when it is not bipartite with sigma on one side"""
    family = Family(family)
    params = params or GeneratorParams()
    builders = {
        Family.PATH: lambda: path_instance(params.n, params.positive),
        Family.CYCLE: lambda: cycle_instance(params.n, params.positive),
        Family.GRID: lambda: grid_instance(params.rows, params.cols, params.positive),
        Family.STAR: lambda: star_instance(params.n, params.positive),
        Family.COMPLETE: lambda: complete_instance(params.n, params.positive),
        Family.RANDOM_WEIGHTED: lambda: random_weighted_instance(
            params.n, seed, params.edge_probability, params.min_weight, params.max_weight, params.positive
        ),
        Family.LEARNING_OR: lambda: learning_or_instance(params.n, params.positive),
        Family.KDIST: lambda: kdist_instance(params.n, params.positive),
    }
    graph, sigma, marked = builders[family]()
    prepared = prepare_bipartite(graph, sigma, marked)
    if prepared.doubled:
        logger.info(f"{family.value} instance with n={params.n} was doubled to {prepared.network.vertices} vertices")
    return prepared.network, prepared.sigma, prepared.marked
