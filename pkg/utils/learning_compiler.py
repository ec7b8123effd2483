import itertools
import json
import logging
import math
from pathlib import Path
from typing import Callable, Dict, FrozenSet, Iterable, List, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from pydantic import ValidationError

from models.detection import DetectionModel
from models.errors import (
    InputOutsideDomainError, InvalidNetworkError, InvalidParameterError, NoPositiveInputError, WalkSearchError
)
from models.learning import CertificationReport, CertificationRow, CompiledLearningGraph, LearningGraph
from models.network import ElectricNetwork, MarkedSet, Partition, SourceDistribution
from models.walk import WalkParams
from schemas.graph_file import LearningGraphFile
from utils.detector import detect, step_bound
from utils.electric import effective_resistance
from utils.network_ops import total_weight

logger = logging.getLogger(__name__)


def _has_collision(rows: np.ndarray) -> np.ndarray:
    if rows.shape[1] < 2:
        return np.zeros(rows.shape[0], dtype=bool)
    ordered = np.sort(rows, axis=1)
    return (np.diff(ordered, axis=1) == 0).any(axis=1)


# Boolean functions evaluated row-wise on a domain array
FUNCTIONS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "or": lambda rows: (rows != 0).any(axis=1),
    "and": lambda rows: (rows != 0).all(axis=1),
    "collision": _has_collision,
}


class LearningGraphCompiler:
    """Compiles a learning graph and a concrete input into a walk instance"""

    def __init__(self, graph: LearningGraph):
        if graph.function not in FUNCTIONS:
            raise InvalidParameterError(
                f"unknown function '{graph.function}', expected one of {sorted(FUNCTIONS)}"
            )
        self.graph = graph
        self.domain = self._domain_array()
        self.values = FUNCTIONS[graph.function](self.domain).astype(int)
        self.subsets, self.edges = self._reachable_structure()
        self.ids = {subset: index for index, subset in enumerate(self.subsets)}

    def _domain_array(self) -> np.ndarray:
        n, q = self.graph.n, self.graph.q
        if self.graph.domain == "all":
            rows = list(itertools.product(range(q), repeat=n))
        else:
            rows = [tuple(row) for row in self.graph.domain]
        domain = np.array(rows, dtype=int).reshape(len(rows), n)
        if domain.size and (domain.min() < 0 or domain.max() >= q):
            raise InvalidParameterError(f"domain has entries outside 0..{q - 1}")
        return domain

    def _reachable_structure(self) -> Tuple[List[FrozenSet[int]], List[Tuple[FrozenSet[int], FrozenSet[int], float]]]:
        empty = frozenset()
        digraph = nx.DiGraph()
        digraph.add_node(empty)
        for subset, j, w in self.graph.edges:
            digraph.add_edge(frozenset(subset), frozenset(subset) | {j}, weight=w)
        # an edge can be walked in either direction, but nothing outside the
        # undirected component of the empty set can carry flow
        component = nx.node_connected_component(digraph.to_undirected(), empty)
        subsets = sorted(component, key=lambda s: (len(s), tuple(sorted(s))))
        edges = [
            (frozenset(subset), frozenset(subset) | {j}, w)
            for subset, j, w in self.graph.edges
            if frozenset(subset) in component
        ]
        pruned = digraph.number_of_nodes() - len(subsets)
        if pruned:
            logger.info(f"Pruned {pruned} learning-graph vertices unreachable from the empty set")
        return subsets, edges

    def evaluate(self, x: Sequence[int]) -> int:
        return int(self.values[self._row_of(x)])

    def _row_of(self, x: Sequence[int]) -> int:
        x = np.asarray(x, dtype=int)
        if x.shape != (self.graph.n,):
            raise InputOutsideDomainError(f"input {x.tolist()} does not have length {self.graph.n}")
        matches = np.flatnonzero((self.domain == x).all(axis=1))
        if not matches.size:
            raise InputOutsideDomainError(f"input {x.tolist()} is not in the domain")
        return int(matches[0])

    def is_certificate(self, subset: FrozenSet[int], x: Sequence[int]) -> bool:
        """Every z in the domain agreeing with x on subset has f(z) = 1"""
        x = np.asarray(x, dtype=int)
        columns = sorted(subset)
        agree = (self.domain[:, columns] == x[columns]).all(axis=1)
        return bool(self.values[agree].all())

    @property
    def network(self) -> ElectricNetwork:
        part_a = frozenset(i for i, s in enumerate(self.subsets) if len(s) % 2 == 0)
        part_b = frozenset(range(len(self.subsets))) - part_a
        return ElectricNetwork(
            vertices=len(self.subsets),
            edges=[(self.ids[s], self.ids[t], w) for s, t, w in self.edges],
            partition=Partition(A=part_a, B=part_b)
        )

    def compile(self, x: Sequence[int]) -> CompiledLearningGraph:
        row = self._row_of(x)
        marked = frozenset(i for i, s in enumerate(self.subsets) if self.is_certificate(s, x))
        return CompiledLearningGraph(
            network=self.network,
            sigma=SourceDistribution.point_mass(self.ids[frozenset()]),
            marked=MarkedSet(marked=marked),
            subsets=tuple(self.subsets),
            x=tuple(int(v) for v in x),
            value=int(self.values[row])
        )

    def resistance(self, x: Sequence[int]) -> float:
        compiled = self.compile(x)
        if not compiled.value:
            raise NoPositiveInputError(f"input {list(x)} is negative")
        return effective_resistance(compiled.network, compiled.sigma, compiled.marked)

    def complexity(self, positive_inputs: Iterable[Sequence[int]]) -> float:
        positives = [x for x in positive_inputs if self.evaluate(x)]
        if not positives:
            raise NoPositiveInputError("complexity needs at least one positive input")
        weight = total_weight(self.network)
        return math.sqrt(weight * max(self.resistance(x) for x in positives))

    def certify_detection(
            self,
            positive_inputs: Iterable[Sequence[int]],
            negative_inputs: Iterable[Sequence[int]],
            params: WalkParams,
            model: Union[DetectionModel, str] = DetectionModel.IDEAL
    ) -> CertificationReport:
        """Run detection on every input with R the largest positive resistance"""
        positives = [tuple(x) for x in positive_inputs]
        negatives = [tuple(x) for x in negative_inputs]
        failures: List[str] = []

        resistances: Dict[Tuple[int, ...], float] = {}
        for x in positives:
            try:
                resistances[x] = self.resistance(x)
            except WalkSearchError as e:
                failures.append(f"{list(x)}: {e}")
        if not resistances:
            raise NoPositiveInputError("no positive input could be compiled to a finite resistance")

        bound = max(resistances.values())
        weight = total_weight(self.network)
        run_params = params.with_resistance(bound)
        rows = []
        for x, is_positive in [(x, True) for x in positives] + [(x, False) for x in negatives]:
            row = CertificationRow(x=x, is_positive=is_positive, resistance=resistances.get(x))
            try:
                compiled = self.compile(x)
                if bool(compiled.value) != is_positive:
                    raise InvalidParameterError(f"f({list(x)}) = {compiled.value}, listed as {'positive' if is_positive else 'negative'}")
                result = detect(compiled.network, compiled.sigma, compiled.marked, run_params, model)
            except WalkSearchError as e:
                row.error = str(e)
                rows.append(row)
                if not any(f.startswith(f"{list(x)}:") for f in failures):
                    failures.append(f"{list(x)}: {e}")
                continue

            row.accept_prob = result.total_accept_prob
            row.steps = result.steps
            row.queries = 2 * result.steps
            row.step_bound = step_bound(run_params, weight)
            if is_positive and result.total_accept_prob < 2.0 / 3.0:
                failures.append(f"{list(x)}: positive accepted with {result.total_accept_prob:.6f} < 2/3")
            if not is_positive and result.total_accept_prob > 1.0 / 3.0:
                failures.append(f"{list(x)}: negative accepted with {result.total_accept_prob:.6f} > 1/3")
            if DetectionModel.parse(model) == DetectionModel.IDEAL and result.steps > row.step_bound:
                failures.append(f"{list(x)}: {result.steps} steps exceed the bound {row.step_bound}")
            rows.append(row)

        for failure in failures:
            logger.error(f"Certification failure: {failure}")
        return CertificationReport(
            total_weight=weight,
            resistance_bound=bound,
            complexity=math.sqrt(weight * bound),
            rows=rows,
            failures=failures
        )


def compile_instance(graph: LearningGraph, x: Sequence[int]) -> Tuple[ElectricNetwork, SourceDistribution, MarkedSet]:
    compiled = LearningGraphCompiler(graph).compile(x)
    return compiled.network, compiled.sigma, compiled.marked


def complexity(graph: LearningGraph, positive_inputs: Iterable[Sequence[int]]) -> float:
    return LearningGraphCompiler(graph).complexity(positive_inputs)


def certify_detection(
        graph: LearningGraph,
        positive_inputs: Iterable[Sequence[int]],
        negative_inputs: Iterable[Sequence[int]],
        params: WalkParams,
        model: Union[DetectionModel, str] = DetectionModel.IDEAL
) -> CertificationReport:
    return LearningGraphCompiler(graph).certify_detection(positive_inputs, negative_inputs, params, model)


def star_graph(n: int, function: str = "or", weight: float = 1.0) -> LearningGraph:
    """Empty set joined to every singleton"""
    return LearningGraph(n=n, edges=[(frozenset(), j, weight) for j in range(n)], function=function)


def chain_graph(n: int, function: str = "and", weight: float = 1.0) -> LearningGraph:
    """Empty set -> {0} -> {0,1} -> ... -> {0..n-1}"""
    return LearningGraph(
        n=n,
        edges=[(frozenset(range(j)), j, weight) for j in range(n)],
        function=function
    )


def unit_vectors(n: int) -> List[Tuple[int, ...]]:
    return [tuple(1 if i == j else 0 for i in range(n)) for j in range(n)]


def from_file(raw: LearningGraphFile) -> LearningGraph:
    domain = raw.function.domain
    return LearningGraph(
        n=raw.n,
        edges=[(frozenset(subset), j, w) for subset, j, w in raw.edges],
        function=raw.function.name,
        q=raw.function.q,
        domain=domain if isinstance(domain, str) else tuple(tuple(row) for row in domain)
    )


def load_learning_graph(path: Union[str, Path]) -> LearningGraph:
    path = Path(path)
    try:
        return from_file(LearningGraphFile.model_validate(json.loads(path.read_text())))
    except OSError as e:
        raise InvalidNetworkError(f"cannot read learning graph file: {e}", str(path))
    except (ValidationError, ValueError) as e:
        raise InvalidNetworkError(f"malformed learning graph file: {e}", str(path))
