"""Benchmark DQN scheduler.

Same loop as the filter-aided scheduler with four changes: a sensor is
polled every step (no action 0), the observation is the full filter state
``(x_pri, Psi_pri, tau)``, steps without a query earn zero reward, and the
network is deeper with dropout on the first two hidden layers.
"""

from math import ceil
from typing import List, Optional

import numpy as np

from app.core.errors import DomainError
from app.core.schedulers.base import SchedulerObservation, StepContext
from app.core.schedulers.proposed import DqnParams, ProposedScheduler
from app.core.utils.numerics import StreamFamily

BENCHMARK_DROPOUT = (0.1, 0.1, 0.0)


class BenchmarkScheduler(ProposedScheduler):
    name = "benchmark_drl"
    idle_reward = "zero"
    action_offset = 1
    train_dropout = BENCHMARK_DROPOUT

    def __init__(self, n_sensors: int, n_clients: int, params: DqnParams, streams: StreamFamily,
                 state_dim: Optional[int] = None):
        if state_dim is None:
            raise DomainError("the benchmark scheduler needs the state dimension")
        super().__init__(n_sensors, n_clients, params, streams, state_dim=state_dim)

    @property
    def action_space(self) -> List[int]:
        return list(range(1, self.n_sensors + 1))

    def layer_sizes(self) -> List[int]:
        m, n = self.state_dim, self.n_sensors
        return [m + m * m + self.n_clients, int(ceil(2.5 * m)), m, n, n]

    def observe(self, ctx: StepContext) -> np.ndarray:
        return SchedulerObservation.from_filter(ctx.fs, ctx.clients).full_state()
