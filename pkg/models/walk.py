import math
from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from config import C1, C2, EIGENPHASE_TOLERANCE


class WalkParams(BaseModel):
    """Constants of the walk: C1 scales the source amplitude, C2 the precision"""
    model_config = ConfigDict(frozen=True)

    c1: float = Field(C1, ge=1)
    c2: float = Field(C2, ge=1)
    resistance: float = Field(1.0, gt=0, description="Known upper bound R on the effective resistance")

    @property
    def c(self) -> float:
        """Step constant C with ceil(1/theta) <= ceil(C sqrt(RW)) when RW >= 1"""
        return self.c2 * math.sqrt(1 + self.c1)

    def theta(self, total_weight: float) -> float:
        return 1.0 / (self.c2 * math.sqrt(1 + self.c1 * self.resistance * total_weight))

    def with_resistance(self, resistance: float) -> "WalkParams":
        return self.model_copy(update={"resistance": resistance})


class WalkSpace(BaseModel):
    """Basis {|u> : u in S} followed by {|e> : e in E}, edges in index order"""
    model_config = ConfigDict(frozen=True)

    sources: Tuple[int, ...]
    edges: Tuple[Tuple[int, int], ...]
    local: Dict[int, Tuple[int, ...]] = Field(..., description="Basis indices of H_u per vertex")

    @property
    def dimension(self) -> int:
        return len(self.sources) + len(self.edges)

    @property
    def labels(self) -> List[str]:
        return [f"v{u}" for u in self.sources] + [f"e{i}:{u}-{v}" for i, (u, v) in enumerate(self.edges)]

    def vertex_index(self, u: int) -> int:
        return self.sources.index(u)

    def edge_index(self, edge: int) -> int:
        return len(self.sources) + edge

    def source_state(self, sigma) -> np.ndarray:
        """varsigma = sum_u sqrt(sigma_u) |u>"""
        state = np.zeros(self.dimension)
        for i, u in enumerate(self.sources):
            state[i] = math.sqrt(sigma.get(u))
        return state


class WalkOperator(BaseModel):
    """U = R_B R_A with its eigenphases and orthonormal eigenvectors"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    space: WalkSpace
    reflection_a: np.ndarray
    reflection_b: np.ndarray
    projector_a: np.ndarray
    projector_b: np.ndarray
    unitary: np.ndarray
    phases: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dimension(self) -> int:
        return self.space.dimension

    def overlaps(self, state: np.ndarray) -> np.ndarray:
        """|<v_j, state>|^2 for every eigenvector v_j"""
        return np.abs(self.eigenvectors.conj().T @ state) ** 2

    def spectral_projector(self, theta: float) -> np.ndarray:
        """P_theta onto eigenvectors with |phase| <= theta"""
        keep = np.abs(self.phases) <= theta + EIGENPHASE_TOLERANCE
        vectors = self.eigenvectors[:, keep]
        return vectors @ vectors.conj().T

    def unitarity_error(self) -> float:
        identity = np.eye(self.dimension)
        return float(np.linalg.norm(self.unitary.T @ self.unitary - identity, 2)) if self.dimension else 0.0

    def involution_errors(self) -> Tuple[float, float]:
        if not self.dimension:
            return 0.0, 0.0
        identity = np.eye(self.dimension)
        return (
            float(np.linalg.norm(self.reflection_a @ self.reflection_a - identity, 2)),
            float(np.linalg.norm(self.reflection_b @ self.reflection_b - identity, 2))
        )

    def reassembly_error(self) -> float:
        if not self.dimension:
            return 0.0
        rebuilt = self.eigenvectors @ np.diag(np.exp(1j * self.phases)) @ self.eigenvectors.conj().T
        return float(np.linalg.norm(rebuilt - self.unitary, 2))
