"""Common scheduler interface.

The run loop predicts, hands the scheduler a ``StepContext`` to pick an
action, computes the posterior and reward itself, then calls ``learn``.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from app.core.estimation.estimator import FilterState
from app.core.world.queries import ClientProcess


@dataclass(frozen=True)
class SchedulerObservation:
    """What a DRL scheduler sees: ``trace(Psi_pri)`` and the per-client ``tau``.

    ``x_pri``/``psi_pri`` are kept for the full-state observation.
    """

    trace_pri: float
    tau: np.ndarray
    x_pri: Optional[np.ndarray] = None
    psi_pri: Optional[np.ndarray] = None

    @classmethod
    def from_filter(cls, fs: FilterState, clients: Sequence[ClientProcess]) -> "SchedulerObservation":
        return cls(
            trace_pri=float(np.trace(fs.psi_pri)),
            tau=np.array([c.tau for c in clients], dtype=float),
            x_pri=fs.x_pri,
            psi_pri=fs.psi_pri,
        )

    def compact(self) -> np.ndarray:
        """``[trace_pri, tau_1..tau_C]``."""
        return np.concatenate(([self.trace_pri], self.tau))

    def full_state(self) -> np.ndarray:
        """``[x_pri, vec(Psi_pri), tau]``, length ``M + M^2 + C``."""
        return np.concatenate((self.x_pri, self.psi_pri.ravel(), self.tau))


@dataclass
class StepContext:
    """Everything a scheduler may look at when deciding at step ``t``."""

    t: int
    fs: FilterState
    clients: List[ClientProcess]
    queried: List[bool]

    @property
    def any_query(self) -> bool:
        return any(self.queried)


class Scheduler(ABC):
    """Sensor-polling policy. Action 0 means "poll nobody"; 1..N poll a sensor."""

    name: str = "scheduler"
    idle_reward: str = "trace"

    def __init__(self, n_sensors: int):
        self.n_sensors = n_sensors

    @property
    @abstractmethod
    def action_space(self) -> List[int]:
        ...

    @property
    def n_actions(self) -> int:
        return len(self.action_space)

    @abstractmethod
    def decide(self, ctx: StepContext) -> int:
        """Pick the action for step ``ctx.t`` from the predicted filter state."""

    def learn(self, ctx: StepContext, p: int, r: float) -> None:
        """Consume the reward of the action taken at ``ctx.t``."""

    def diagnostics(self) -> Dict[str, Any]:
        return {}

    def snapshot(self) -> Optional[Dict[str, Any]]:
        """Serializable learned state, if any."""
        return None
