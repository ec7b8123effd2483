from collections import Counter
from typing import Dict, FrozenSet, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.network import ElectricNetwork, MarkedSet, SourceDistribution


class KDistInstance(BaseModel):
    """Input string x in [q]^n, collision arity k and level sizes r_1..r_{k-1}"""
    model_config = ConfigDict(frozen=True)

    x: Tuple[int, ...]
    k: int = Field(3, ge=2)
    r: Tuple[int, ...] = (1, 1)

    @model_validator(mode="after")
    def check_instance(self):
        diagnostics = []
        if len(self.r) != self.k - 1:
            diagnostics.append(f"r needs {self.k - 1} entries for k = {self.k}, got {len(self.r)}")
        if any(value < 1 for value in self.r):
            diagnostics.append(f"level sizes {list(self.r)} must be positive")
        if any(4 * value > len(self.x) for value in self.r):
            diagnostics.append(f"level sizes {list(self.r)} exceed n/4 for n = {len(self.x)}")
        heavy = {value: count for value, count in Counter(self.x).items() if count >= self.k}
        if len(heavy) > 1 or any(count > self.k for count in heavy.values()):
            diagnostics.append(f"x must contain at most one {self.k}-collision, found multiplicities {heavy}")
        if diagnostics:
            raise ValueError("; ".join(diagnostics))
        return self

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def collision(self) -> Optional[Tuple[int, ...]]:
        """Sorted indices of the k-collision, if there is one"""
        for value, count in Counter(self.x).items():
            if count == self.k:
                return tuple(i for i, v in enumerate(self.x) if v == value)
        return None

    @property
    def is_positive(self) -> bool:
        return self.collision is not None

    @property
    def base_type(self) -> Tuple[int, ...]:
        return tuple(self.r) + (0,)

    def level_type(self, level: int) -> Tuple[int, ...]:
        """tau_i: the base type with one more i-collision; tau_0 is the base type"""
        tau = list(self.base_type)
        if level:
            tau[level - 1] += 1
        return tuple(tau)


class KDistGraph(BaseModel):
    """Levels V_0..V_k, dead-ends and the resulting unit-weight network"""
    model_config = ConfigDict(frozen=True)

    instance: KDistInstance
    levels: Tuple[Tuple[FrozenSet[int], ...], ...]
    deadends: Tuple[Tuple[FrozenSet[int], int], ...] = Field(
        ..., description="(S, j) with S in some V_i, i < k, and S xor {j} outside V"
    )
    ids: Dict[FrozenSet[int], int]
    network: ElectricNetwork
    sigma: SourceDistribution
    marked: MarkedSet

    @property
    def level_count(self) -> int:
        return len(self.levels)

    def level_of(self, vertex: int) -> Optional[int]:
        """Level i of a subset vertex, None for dead-ends"""
        offset = 0
        for level, members in enumerate(self.levels):
            if vertex < offset + len(members):
                return level
            offset += len(members)
        return None

    @property
    def subset_count(self) -> int:
        return sum(len(members) for members in self.levels)
