from typing import FrozenSet, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.network import ElectricNetwork, MarkedSet, SourceDistribution

LearningEdge = Tuple[FrozenSet[int], int, float]


class LearningGraph(BaseModel):
    """Weighted learning graph on subsets of the input indices 0..n-1.

    Each edge (S, j, w) joins S to S + {j}; the walk starts at the empty set.
    """
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1)
    edges: Tuple[LearningEdge, ...] = ()
    function: str = Field("or", description="Name in the function registry")
    q: int = Field(2, ge=2)
    domain: Union[str, Tuple[Tuple[int, ...], ...]] = "all"

    @model_validator(mode="after")
    def check_edges(self):
        diagnostics = []
        seen = set()
        for index, (subset, j, w) in enumerate(self.edges):
            if not 0 <= j < self.n:
                diagnostics.append(f"edge {index} adds index {j} outside 0..{self.n - 1}")
            if j in subset:
                diagnostics.append(f"edge {index} adds index {j} already in {sorted(subset)}")
            if any(not 0 <= i < self.n for i in subset):
                diagnostics.append(f"edge {index} starts at {sorted(subset)} with indices outside 0..{self.n - 1}")
            if not w > 0:
                diagnostics.append(f"edge {index} has non-positive weight {w}")
            key = (subset, j)
            if key in seen:
                diagnostics.append(f"duplicate edge {sorted(subset)} -> +{j}")
            seen.add(key)
        if diagnostics:
            raise ValueError("; ".join(diagnostics))
        return self


class CompiledLearningGraph(BaseModel):
    """Walk instance of a learning graph for one input, with vertex ids mapped back to subsets"""
    model_config = ConfigDict(frozen=True)

    network: ElectricNetwork
    sigma: SourceDistribution
    marked: MarkedSet
    subsets: Tuple[FrozenSet[int], ...]
    x: Tuple[int, ...]
    value: int


class CertificationRow(BaseModel):
    x: Tuple[int, ...]
    is_positive: bool
    accept_prob: Optional[float] = None
    steps: Optional[int] = None
    queries: Optional[int] = None
    resistance: Optional[float] = None
    step_bound: Optional[int] = None
    error: Optional[str] = None


class CertificationReport(BaseModel):
    total_weight: float
    resistance_bound: float
    complexity: float
    rows: List[CertificationRow] = []
    failures: List[str] = []

    @property
    def passed(self) -> bool:
        return not self.failures
