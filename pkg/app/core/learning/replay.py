"""Experience replay and the small DQN helpers around it."""

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from app.core.errors import DomainError
from app.core.learning.neural import Mlp, forward
from app.core.utils.logger import get_logger
from app.core.utils.numerics import RngStream

logger = get_logger(__name__)

EVICTION_POLICIES = ("batch_slot", "fifo")
EPSILON_FLOOR = 0.1
EPSILON_DECAY = 0.005


@dataclass(frozen=True)
class ReplayTuple:
    """``(o_prev, p, r, o_next)``; observations are stored as flat vectors."""

    o_prev: np.ndarray
    p: int
    r: float
    o_next: np.ndarray


@dataclass
class ReplayBuffer:
    capacity: int
    eviction: str = "batch_slot"
    tuples: List[ReplayTuple] = field(default_factory=list)

    def __post_init__(self):
        if self.capacity < 1:
            raise DomainError(f"replay capacity must be positive, got {self.capacity}")
        if self.eviction not in EVICTION_POLICIES:
            raise DomainError(f"unknown eviction policy '{self.eviction}', expected one of {EVICTION_POLICIES}")

    @property
    def count(self) -> int:
        return len(self.tuples)

    def __len__(self) -> int:
        return len(self.tuples)

    def push(self, item: ReplayTuple, batch_size: int) -> "ReplayBuffer":
        """Append ``item``; a full buffer first drops entry ``batch_size`` (1-based) or its oldest."""
        if self.count >= self.capacity:
            if self.eviction == "batch_slot":
                index = min(max(batch_size, 1), self.count) - 1
            else:
                index = 0
            del self.tuples[index]
        self.tuples.append(item)
        return self

    def sample(self, batch_size: int, rng: RngStream) -> List[ReplayTuple]:
        """Uniform minibatch without replacement."""
        if batch_size > self.count:
            raise DomainError(f"cannot sample {batch_size} tuples from a buffer of {self.count}")
        indices = rng.choice(self.count, size=batch_size, replace=False)
        return [self.tuples[i] for i in indices]


def replay_push(buf: ReplayBuffer, item: ReplayTuple, batch_size: int) -> ReplayBuffer:
    return buf.push(item, batch_size)


def epsilon_greedy(action_values: np.ndarray, epsilon: float, rng: RngStream) -> int:
    """Exploit iff a uniform draw is strictly above ``epsilon``; ties go to the lowest index."""
    if not 0.0 <= epsilon <= 1.0:
        raise DomainError(f"epsilon must lie in [0, 1], got {epsilon}")
    theta = rng.uniform()
    if theta > epsilon:
        return int(np.argmax(action_values))
    return int(rng.integers(0, len(action_values)))


def decay_epsilon(epsilon: float) -> float:
    return max(EPSILON_FLOOR, epsilon - EPSILON_DECAY)


def target_values(batch: Sequence[ReplayTuple], target_net: Mlp, gamma: float) -> np.ndarray:
    """``r_j + gamma * max_i Q_target(o_next_j)_i`` for every tuple of the batch."""
    if not batch:
        raise DomainError("target values need a nonempty batch")
    next_obs = np.stack([item.o_next for item in batch])
    rewards = np.array([item.r for item in batch], dtype=float)
    q_next, _ = forward(target_net, next_obs, mode="eval")
    return rewards + gamma * q_next.max(axis=1)
