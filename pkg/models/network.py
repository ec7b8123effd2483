from functools import cached_property
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from utils.validators import distribution_diagnostics, network_diagnostics

Edge = Tuple[int, int, float]


class Partition(BaseModel):
    """Bipartition (A, B) of the vertex set"""
    model_config = ConfigDict(frozen=True)

    A: FrozenSet[int]
    B: FrozenSet[int]


class ElectricNetwork(BaseModel):
    """Weighted simple undirected graph on vertices 0..n-1.

    Edges keep their list position as a stable index; every matrix built
    downstream orders its edge basis by that index.
    """
    model_config = ConfigDict(frozen=True)

    vertices: int = Field(..., ge=0, description="Number of vertices, ids are 0..n-1")
    edges: Tuple[Edge, ...] = Field(default=(), description="(u, v, w) with w > 0")
    partition: Optional[Partition] = Field(None, description="Optional bipartition (A, B)")

    @model_validator(mode="after")
    def check_invariants(self):
        part = self.partition
        diagnostics = network_diagnostics(
            self.vertices,
            self.edges,
            part.A if part else None,
            part.B if part else None
        )
        if diagnostics:
            raise ValueError("; ".join(diagnostics))
        return self

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([w for _, _, w in self.edges], dtype=float)

    @cached_property
    def incidence(self) -> List[List[int]]:
        """Edge indices incident to each vertex, in edge-index order"""
        incident: List[List[int]] = [[] for _ in range(self.vertices)]
        for index, (u, v, _) in enumerate(self.edges):
            incident[u].append(index)
            incident[v].append(index)
        return incident

    @cached_property
    def weighted_degrees(self) -> np.ndarray:
        degrees = np.zeros(self.vertices)
        for u, v, w in self.edges:
            degrees[u] += w
            degrees[v] += w
        return degrees

    @cached_property
    def laplacian(self) -> np.ndarray:
        lap = np.diag(self.weighted_degrees)
        for u, v, w in self.edges:
            lap[u, v] -= w
            lap[v, u] -= w
        return lap

    @cached_property
    def incidence_matrix(self) -> np.ndarray:
        """Signed vertex-by-edge matrix, +1 at the tail u and -1 at the head v"""
        matrix = np.zeros((self.vertices, self.edge_count))
        for index, (u, v, _) in enumerate(self.edges):
            matrix[u, index] = 1.0
            matrix[v, index] = -1.0
        return matrix

    def other_end(self, edge_index: int, u: int) -> int:
        a, b, _ = self.edges[edge_index]
        return b if a == u else a

    def in_part_a(self, u: int) -> bool:
        if self.partition is None:
            raise ValueError("network has no partition")
        return u in self.partition.A


class SourceDistribution(BaseModel):
    """Initial probability distribution sigma over the vertices"""
    model_config = ConfigDict(frozen=True)

    sigma: Dict[int, float]

    @field_validator("sigma")
    @classmethod
    def check_normalized(cls, v):
        # vertex range is checked against a network, not here
        diagnostics = [d for d in distribution_diagnostics(max(v, default=-1) + 1, v)]
        if diagnostics:
            raise ValueError("; ".join(diagnostics))
        return {u: p for u, p in v.items() if p != 0}

    @property
    def support(self) -> List[int]:
        return sorted(self.sigma)

    def get(self, u: int) -> float:
        return self.sigma.get(u, 0.0)

    def as_vector(self, n: int) -> np.ndarray:
        vector = np.zeros(n)
        for u, p in self.sigma.items():
            vector[u] = p
        return vector

    @classmethod
    def point_mass(cls, u: int) -> "SourceDistribution":
        return cls(sigma={u: 1.0})

    @classmethod
    def uniform(cls, vertices) -> "SourceDistribution":
        vertices = sorted(set(vertices))
        if not vertices:
            raise ValueError("uniform distribution needs at least one vertex")
        share = 1.0 / len(vertices)
        return cls(sigma={u: share for u in vertices})


class MarkedSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    marked: FrozenSet[int] = frozenset()

    def __contains__(self, u: int) -> bool:
        return u in self.marked

    def __len__(self) -> int:
        return len(self.marked)

    def __bool__(self) -> bool:
        return bool(self.marked)

    @classmethod
    def of(cls, *vertices: int) -> "MarkedSet":
        return cls(marked=frozenset(vertices))


class PreparedInstance(BaseModel):
    """Instance ready for walk construction, with the map back to the input graph"""
    model_config = ConfigDict(frozen=True)

    network: ElectricNetwork
    sigma: SourceDistribution
    marked: MarkedSet
    doubled: bool = False
    origin: Optional[Tuple[Tuple[int, int], ...]] = Field(
        None, description="origin[v'] = (v, layer) when the instance was doubled"
    )
