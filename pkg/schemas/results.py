from pydantic import BaseModel, Field
from typing import Any, Dict, List, Optional

# Fixed CSV column order for sweep tables
SWEEP_COLUMNS = ["instance-id", "n", "W", "R", "theta", "steps", "model", "accept-prob", "is-positive"]


class CommandResponse(BaseModel):
    """Standard command response wrapper"""
    success: bool
    data: Any = None
    message: Optional[str] = None
    count: Optional[int] = None


class SweepRow(BaseModel):
    instance_id: str
    n: int
    W: float
    R: float
    theta: float
    steps: int
    model: str
    accept_prob: float
    is_positive: bool

    def as_record(self) -> Dict[str, Any]:
        values = self.model_dump()
        return {column: values[column.replace("-", "_")] for column in SWEEP_COLUMNS}


class CheckRow(BaseModel):
    """One numeric check of a suite: a measured value against its bound"""
    instance_id: str
    check: str
    value: float
    bound: float
    passed: bool
    detail: Optional[str] = None


class SuiteReport(BaseModel):
    name: str
    sweep: List[SweepRow] = []
    checks: List[CheckRow] = []
    failures: List[str] = []
    artifacts: List[str] = Field(default_factory=list, description="Files written for this suite")

    @property
    def passed(self) -> bool:
        return not self.failures and all(check.passed for check in self.checks)
