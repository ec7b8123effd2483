import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from models.network import ElectricNetwork, MarkedSet, SourceDistribution


class Flow(BaseModel):
    """Edge flow stored once per edge, positive along the stored (u, v) orientation.

    p_vu = -p_uv is implied, so antisymmetry holds by construction.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def as_float_array(cls, v):
        array = np.asarray(v, dtype=float)
        if array.ndim != 1:
            raise ValueError(f"flow values must be one-dimensional, got shape {array.shape}")
        return array

    def value(self, edge_index: int, tail: int, graph: ElectricNetwork) -> float:
        """p along edge_index read from tail towards the other endpoint"""
        u, _, _ = graph.edges[edge_index]
        p = float(self.values[edge_index])
        return p if tail == u else -p

    def residuals(self, graph: ElectricNetwork, sigma: SourceDistribution, marked: MarkedSet) -> np.ndarray:
        """sigma_u minus net outflow at every unmarked vertex, 0 on M"""
        outflow = graph.incidence_matrix @ self.values if graph.edge_count else np.zeros(graph.vertices)
        residual = sigma.as_vector(graph.vertices) - outflow
        for u in marked.marked:
            residual[u] = 0.0
        return residual

    def max_residual(self, graph: ElectricNetwork, sigma: SourceDistribution, marked: MarkedSet) -> float:
        residual = self.residuals(graph, sigma, marked)
        return float(np.max(np.abs(residual))) if residual.size else 0.0

    def reversed(self) -> "Flow":
        """Same flow expressed under the reversed orientation of every edge"""
        return Flow(values=-self.values)

    def support_size(self, tolerance: float = 1e-15) -> int:
        return int(np.count_nonzero(np.abs(self.values) > tolerance))

    @classmethod
    def zero(cls, graph: ElectricNetwork) -> "Flow":
        return cls(values=np.zeros(graph.edge_count))
