from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field, model_validator

QueryValue = Union[float, List[float]]


class ClientStep(BaseModel):
    queried: bool = False
    mse: Optional[float] = None
    z_true: Optional[QueryValue] = None
    z_hat: Optional[QueryValue] = None


class RunRecord(BaseModel):
    t: int
    action: int
    transmitted: bool
    erased: bool
    reward: float
    trace_pri: float
    trace_pos: float
    warmup: bool = False
    err_norm: Optional[float] = None
    clients: List[ClientStep] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_flags(self) -> "RunRecord":
        if self.transmitted != (self.action != 0):
            raise ValueError("transmitted must equal (action != 0)")
        if self.erased and not self.transmitted:
            raise ValueError("only a transmitted packet can be erased")
        return self


class QueryEvent(BaseModel):
    t: int
    client: int
    z_true: QueryValue
    z_hat: QueryValue
    mse: float = Field(ge=0.0)


class ClientSummary(BaseModel):
    median_mse: Optional[float] = None
    q1: Optional[float] = None
    q3: Optional[float] = None
    queries: int = 0


class RunSummary(BaseModel):
    scheduler: str
    actions: List[int]
    asf: List[float]
    transmissions: int
    per_client: List[ClientSummary]
    total_reward: float
    seed: int
    evaluation_steps: int
    query_steps: int
    wall_clock_s: float = 0.0
    config_echo: Dict[str, Any] = Field(default_factory=dict)


class Quartiles(BaseModel):
    median: float
    q1: float
    q3: float


class AggregateSummary(BaseModel):
    seeds: List[int]
    metrics: Dict[str, Quartiles]
