import json
import logging
from pathlib import Path
from typing import Any, List, Mapping, Optional, Tuple, Union

import networkx as nx
import numpy as np
from pydantic import ValidationError

from models.errors import EmptyGraphError, InvalidNetworkError, OutputError
from models.network import ElectricNetwork, MarkedSet, Partition, PreparedInstance, SourceDistribution
from schemas.graph_file import GraphFile, PartitionFile
from utils.validators import (
    distribution_diagnostics, marked_diagnostics, network_diagnostics, support_diagnostics
)

logger = logging.getLogger(__name__)


def total_weight(graph: ElectricNetwork) -> float:
    return float(sum(w for _, _, w in graph.edges))


def stationary_distribution(graph: ElectricNetwork) -> SourceDistribution:
    """pi_u = weighted degree of u / 2W"""
    weight = total_weight(graph)
    if weight <= 0:
        raise EmptyGraphError("stationary distribution needs a positive total weight")
    pi = graph.weighted_degrees / (2.0 * weight)
    return SourceDistribution(sigma={u: float(p) for u, p in enumerate(pi) if p > 0})


def transition_matrix(graph: ElectricNetwork) -> np.ndarray:
    """Row-stochastic matrix of the weighted random walk; isolated vertices stay put"""
    degrees = graph.weighted_degrees
    matrix = -graph.laplacian + np.diag(degrees)
    for u in range(graph.vertices):
        if degrees[u] > 0:
            matrix[u] /= degrees[u]
        else:
            matrix[u, u] = 1.0
    return matrix


def bipartite_double(
        graph: ElectricNetwork,
        sigma: SourceDistribution,
        marked: MarkedSet
) -> Tuple[ElectricNetwork, SourceDistribution, MarkedSet]:
    """Bipartite double cover V x {0, 1}.

    (u, b) gets id u + b*n, so part A is the first copy. Original edge i
    becomes edges 2i = (u,0)(v,1) and 2i+1 = (u,1)(v,0).
    """
    n = graph.vertices
    edges = []
    for u, v, w in graph.edges:
        edges.append((u, v + n, w))
        edges.append((u + n, v, w))
    doubled = ElectricNetwork(
        vertices=2 * n,
        edges=edges,
        partition=Partition(A=frozenset(range(n)), B=frozenset(range(n, 2 * n)))
    )
    doubled_sigma = SourceDistribution(sigma=dict(sigma.sigma))
    doubled_marked = MarkedSet(marked=frozenset(marked.marked) | frozenset(u + n for u in marked.marked))
    return doubled, doubled_sigma, doubled_marked


def to_networkx(graph: ElectricNetwork) -> nx.Graph:
    nx_graph = nx.Graph()
    nx_graph.add_nodes_from(range(graph.vertices))
    for index, (u, v, w) in enumerate(graph.edges):
        nx_graph.add_edge(u, v, weight=w, index=index)
    return nx_graph


def _two_coloring(graph: ElectricNetwork, sigma: SourceDistribution) -> Optional[Partition]:
    """Bipartition with the support of sigma inside A, if one exists"""
    nx_graph = to_networkx(graph)
    part_a, part_b = set(), set()
    for component in nx.connected_components(nx_graph):
        sub = nx_graph.subgraph(component)
        if not nx.is_bipartite(sub):
            return None
        coloring = nx.bipartite.color(sub)
        sources = [u for u in sigma.support if u in component]
        if len({coloring[u] for u in sources}) > 1:
            return None
        flip = bool(sources) and coloring[sources[0]] == 1
        for u, color in coloring.items():
            (part_a if (color == 1) == flip else part_b).add(u)
    return Partition(A=frozenset(part_a), B=frozenset(part_b))


def prepare_bipartite(
        graph: ElectricNetwork,
        sigma: SourceDistribution,
        marked: MarkedSet
) -> PreparedInstance:
    """Make the instance satisfy the walk preconditions, doubling only when needed"""
    if graph.partition is not None and all(u in graph.partition.A for u in sigma.support):
        return PreparedInstance(network=graph, sigma=sigma, marked=marked)

    partition = _two_coloring(graph, sigma)
    if partition is not None:
        colored = ElectricNetwork(vertices=graph.vertices, edges=graph.edges, partition=partition)
        return PreparedInstance(network=colored, sigma=sigma, marked=marked)

    logger.warning(f"Graph on {graph.vertices} vertices is not bipartite with sigma in one part, doubling it")
    doubled, doubled_sigma, doubled_marked = bipartite_double(graph, sigma, marked)
    n = graph.vertices
    origin = tuple((u % n, u // n) for u in range(2 * n))
    return PreparedInstance(
        network=doubled,
        sigma=doubled_sigma,
        marked=doubled_marked,
        doubled=True,
        origin=origin
    )


def validate(
        graph: Union[ElectricNetwork, GraphFile, Mapping[str, Any]],
        sigma: Union[SourceDistribution, Mapping[Any, float], None] = None,
        marked: Union[MarkedSet, List[int], None] = None
) -> List[str]:
    """Report every violated invariant; the report is empty iff all hold"""
    if isinstance(graph, ElectricNetwork):
        vertices, edges = graph.vertices, graph.edges
        part_a = graph.partition.A if graph.partition else None
        part_b = graph.partition.B if graph.partition else None
    else:
        try:
            raw = graph if isinstance(graph, GraphFile) else GraphFile.model_validate(graph)
        except ValidationError as e:
            return [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        vertices, edges = raw.vertices, raw.edges
        part_a = raw.partition.A if raw.partition else None
        part_b = raw.partition.B if raw.partition else None
        if sigma is None:
            sigma = raw.sigma
        if marked is None:
            marked = raw.marked

    diagnostics = network_diagnostics(vertices, edges, part_a, part_b)
    if sigma is not None:
        raw_sigma = sigma.sigma if isinstance(sigma, SourceDistribution) else sigma
        diagnostics.extend(distribution_diagnostics(vertices, raw_sigma))
        if part_a is not None:
            diagnostics.extend(support_diagnostics(part_a, raw_sigma))
    if marked is not None:
        raw_marked = marked.marked if isinstance(marked, MarkedSet) else marked
        diagnostics.extend(marked_diagnostics(vertices, raw_marked))
    return diagnostics


def check_compatible(graph: ElectricNetwork, sigma: SourceDistribution, marked: MarkedSet) -> None:
    """Raise when sigma or M name vertices outside the graph"""
    diagnostics = distribution_diagnostics(graph.vertices, sigma.sigma)
    diagnostics.extend(marked_diagnostics(graph.vertices, marked.marked))
    if diagnostics:
        raise InvalidNetworkError(diagnostics)


def instance_from_file(raw: GraphFile, context: Optional[str] = None) -> Tuple[ElectricNetwork, SourceDistribution, MarkedSet]:
    diagnostics = validate(raw)
    if diagnostics:
        raise InvalidNetworkError(diagnostics, context)
    partition = None
    if raw.partition is not None:
        partition = Partition(A=frozenset(raw.partition.A), B=frozenset(raw.partition.B))
    graph = ElectricNetwork(vertices=raw.vertices, edges=[tuple(e) for e in raw.edges], partition=partition)
    sigma = SourceDistribution(sigma={int(u): p for u, p in raw.sigma.items()})
    marked = MarkedSet(marked=frozenset(raw.marked))
    return graph, sigma, marked


def instance_to_file(graph: ElectricNetwork, sigma: SourceDistribution, marked: MarkedSet) -> GraphFile:
    partition = None
    if graph.partition is not None:
        partition = PartitionFile(A=sorted(graph.partition.A), B=sorted(graph.partition.B))
    return GraphFile(
        vertices=graph.vertices,
        edges=[[u, v, w] for u, v, w in graph.edges],
        partition=partition,
        sigma={str(u): p for u, p in sorted(sigma.sigma.items())},
        marked=sorted(marked.marked)
    )


def load_instance(path: Union[str, Path]) -> Tuple[ElectricNetwork, SourceDistribution, MarkedSet]:
    path = Path(path)
    try:
        raw = GraphFile.model_validate(json.loads(path.read_text()))
    except OSError as e:
        raise InvalidNetworkError(f"cannot read graph file: {e}", str(path))
    except (ValidationError, json.JSONDecodeError) as e:
        raise InvalidNetworkError(f"malformed graph file: {e}", str(path))
    return instance_from_file(raw, str(path))


def dump_instance(
        path: Union[str, Path],
        graph: ElectricNetwork,
        sigma: SourceDistribution,
        marked: MarkedSet
) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(instance_to_file(graph, sigma, marked).model_dump_json(indent=2))
    except OSError as e:
        raise OutputError(f"cannot write graph file: {e}", str(path))
    return path
