from pydantic import BaseModel, Field, field_validator
from typing import List, Optional
from enum import Enum

import config
from models.walk import WalkParams


class Family(str, Enum):
    PATH = "path"
    CYCLE = "cycle"
    GRID = "grid"
    STAR = "star"
    COMPLETE = "complete"
    RANDOM_WEIGHTED = "random-weighted"
    LEARNING_OR = "learning-or"
    KDIST = "kdist"


class SuiteName(str, Enum):
    COMMUTE = "commute"
    WALK = "walk"
    DETECTION = "detection"
    SCALING = "scaling"
    LEARNING = "learning"
    KDIST = "kdist"
    COLLAPSE = "collapse"
    ACCEPTANCE = "acceptance"


class GeneratorParams(BaseModel):
    """Size parameters; each family reads the ones it needs"""
    n: int = Field(4, ge=1, description="Vertices, leaves, path length or input length")
    rows: int = Field(2, ge=1)
    cols: int = Field(3, ge=1)
    edge_probability: float = Field(0.4, gt=0, le=1)
    min_weight: float = Field(0.5, gt=0)
    max_weight: float = Field(2.0, gt=0)
    positive: bool = Field(True, description="Whether the instance has marked vertices")

    @field_validator("max_weight")
    @classmethod
    def check_weight_range(cls, v, info):
        low = info.data.get("min_weight")
        if low is not None and v < low:
            raise ValueError(f"max_weight {v} is below min_weight {low}")
        return v


class ExperimentConfig(BaseModel):
    family: Family = Family.PATH
    params: GeneratorParams = GeneratorParams()
    sizes: List[int] = Field(default_factory=list, description="Sweep over params.n when given")
    suite: Optional[SuiteName] = None
    c1: float = Field(config.C1, ge=1)
    c2: float = Field(config.C2, ge=1)
    model: str = config.MODEL
    seed: int = Field(config.SEED, ge=0, lt=2 ** 64)
    out_dir: str = config.OUT_DIR
    max_workers: int = Field(config.MAX_WORKERS, ge=1)

    @field_validator("model")
    @classmethod
    def check_model(cls, v):
        if v not in ("ideal", "kernel", "ideal-threshold", "qpe-kernel"):
            raise ValueError(f"model must be ideal or kernel, got {v}")
        return v

    def walk_params(self, resistance: float = 1.0) -> WalkParams:
        return WalkParams(c1=self.c1, c2=self.c2, resistance=resistance)
