from typing import Dict, List

from pydantic import BaseModel


class CQPointsResponse(BaseModel):
    M: int
    nprime: int
    weights: List[float]
    points: List[List[float]]


class SchedulerComplexity(BaseModel):
    bounds: List[int]
    big_o: Dict[str, str]


class ComplexityResponse(BaseModel):
    params: Dict[str, int]
    schedulers: Dict[str, SchedulerComplexity]
