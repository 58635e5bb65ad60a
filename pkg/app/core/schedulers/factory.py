"""Scheduler selection by name."""

from typing import Optional

from app.core.errors import DomainError
from app.core.estimation.estimator import CubatureQuadratureFilter
from app.core.schedulers.base import Scheduler
from app.core.schedulers.benchmark import BenchmarkScheduler
from app.core.schedulers.montecarlo import MonteCarloScheduler
from app.core.schedulers.proposed import DqnParams, ProposedScheduler
from app.core.utils.numerics import StreamFamily

SCHEDULER_KINDS = ("proposed", "benchmark_drl", "montecarlo")


def build_scheduler(kind: str, cqkf: CubatureQuadratureFilter, n_clients: int, streams: StreamFamily,
                    dqn: Optional[DqnParams] = None, samples: int = 100,
                    whatif_reading: str = "running") -> Scheduler:
    dqn = dqn or DqnParams()
    state_dim = cqkf.h.shape[1]
    if kind == "proposed":
        return ProposedScheduler(cqkf.n_sensors, n_clients, dqn, streams, state_dim=state_dim)
    if kind == "benchmark_drl":
        return BenchmarkScheduler(cqkf.n_sensors, n_clients, dqn, streams, state_dim=state_dim)
    if kind == "montecarlo":
        return MonteCarloScheduler(cqkf, samples, streams, reading=whatif_reading)
    raise DomainError(f"unknown scheduler '{kind}', expected one of {SCHEDULER_KINDS}")
