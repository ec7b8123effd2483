from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field, model_validator


class DetectionModel(str, Enum):
    IDEAL = "ideal-threshold"
    KERNEL = "qpe-kernel"

    @classmethod
    def parse(cls, value) -> "DetectionModel":
        """Accept the short CLI names as well as the enum values"""
        if isinstance(value, cls):
            return value
        aliases = {"ideal": cls.IDEAL, "kernel": cls.KERNEL}
        return aliases.get(value) or cls(value)


class DetectionResult(BaseModel):
    early_accept_prob: float = Field(..., ge=0, le=1)
    phase_accept_prob: float = Field(..., ge=0, le=1)
    total_accept_prob: float = Field(..., ge=0, le=1)
    steps: int = Field(..., ge=0, description="Controlled-U applications")
    theta_used: float = Field(..., ge=0)
    model: DetectionModel
    ancillas: Optional[int] = None
    dimension: int = 0
    doubled: bool = False
    total_weight: float = 0.0
    walk_weight: float = Field(0.0, description="W of the walk graph, 2W when doubled")
    resistance_bound: float = 0.0
    walk_resistance: float = Field(0.0, description="Bound used for the collapsed distribution")

    @model_validator(mode="after")
    def check_total(self):
        expected = self.early_accept_prob + (1 - self.early_accept_prob) * self.phase_accept_prob
        if abs(expected - self.total_accept_prob) > 1e-12:
            raise ValueError(f"total_accept_prob {self.total_accept_prob} does not combine its branches ({expected})")
        return self


class SampleSummary(BaseModel):
    shots: int
    accepted: int
    frequency: float
    seed: int
