from pydantic import BaseModel, Field
from typing import Dict, List, Optional, Tuple, Union


class PartitionFile(BaseModel):
    A: List[int] = []
    B: List[int] = []


class GraphFile(BaseModel):
    """On-disk instance: network, initial distribution and marked set"""
    vertices: int = Field(..., ge=0)
    edges: List[Tuple[int, int, float]] = []
    partition: Optional[PartitionFile] = None
    sigma: Dict[str, float] = {}
    marked: List[int] = []


class FunctionSpec(BaseModel):
    name: str = Field(..., description="Registered Boolean function: or, and, collision")
    q: int = Field(2, ge=2, description="Alphabet size, inputs live in [q]^n")
    domain: Union[str, List[List[int]]] = Field("all", description="'all' or an explicit list of inputs")


class LearningGraphFile(BaseModel):
    n: int = Field(..., ge=1)
    # [sorted subset, j, w] meaning S -> S + {j}
    edges: List[Tuple[List[int], int, float]] = []
    function: FunctionSpec


class KDistInstanceFile(BaseModel):
    x: List[int]
    k: int = Field(3, ge=2)
    r: List[int] = [1, 1]
