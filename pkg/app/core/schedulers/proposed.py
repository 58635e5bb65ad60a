"""Filter-aided DQN scheduler.

Observes ``(trace(Psi_pri), tau)`` and may choose action 0 (poll nobody).
One step runs: action values on the current observation, epsilon-greedy
choice, then (after the run loop computes the posterior and reward) replay
maintenance, tuple storage, target sync, one RMSProp minibatch step and
epsilon decay.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.learning.neural import (
    Mlp,
    RmspropState,
    backward,
    clip_gradients,
    clone,
    copy_weights,
    dqn_loss,
    forward,
    init,
    rmsprop_step,
)
from app.core.learning.replay import (
    ReplayBuffer,
    ReplayTuple,
    decay_epsilon,
    epsilon_greedy,
    target_values,
)
from app.core.schedulers.base import Scheduler, SchedulerObservation, StepContext
from app.core.utils.logger import get_logger
from app.core.utils.numerics import StreamFamily, StreamName

logger = get_logger(__name__)


@dataclass(frozen=True)
class DqnParams:
    gamma: float = 0.9
    mu: float = 0.1
    delta: float = 5.0
    epsilon0: float = 1.0
    sync_every: int = 20
    lr: float = 1.0
    rho: float = 0.9
    eps_opt: float = 1e-8
    init_range: Tuple[float, float] = (-0.3, 0.3)
    hidden: Tuple[int, ...] = (4,)
    memory_factor: int = 100
    batch_factor: int = 30
    eviction: str = "batch_slot"


@dataclass
class DqnState:
    online: Mlp
    target: Mlp
    rmsprop: RmspropState
    epsilon: float
    eta: int
    gamma: float
    mu: float
    delta: float


class ProposedScheduler(Scheduler):
    name = "proposed"
    idle_reward = "trace"
    action_offset = 0
    train_dropout: Optional[Sequence[float]] = None

    def __init__(self, n_sensors: int, n_clients: int, params: DqnParams, streams: StreamFamily,
                 state_dim: Optional[int] = None):
        super().__init__(n_sensors)
        self.n_clients = n_clients
        self.state_dim = state_dim
        self.params = params
        self.streams = streams

        online = init(self.layer_sizes(), streams[StreamName.WEIGHT_INIT],
                      dropout=self.train_dropout, init_range=params.init_range)
        self.dqn = DqnState(
            online=online,
            target=clone(online),
            rmsprop=RmspropState.for_net(online, lr=params.lr, rho=params.rho, eps=params.eps_opt),
            epsilon=params.epsilon0,
            eta=0,
            gamma=params.gamma,
            mu=params.mu,
            delta=params.delta,
        )
        self.buffer = ReplayBuffer(capacity=self.n_actions * params.memory_factor, eviction=params.eviction)
        self.batch_size = self.n_actions * params.batch_factor

        self._obs_prev: Optional[np.ndarray] = None
        self._obs_now: Optional[np.ndarray] = None
        self._warned_cold = False
        self.trainings = 0
        self.last_loss: Optional[float] = None

    @property
    def action_space(self) -> List[int]:
        return list(range(0, self.n_sensors + 1))

    def layer_sizes(self) -> List[int]:
        return [self.n_clients + 1, *self.params.hidden, self.n_sensors + 1]

    def observe(self, ctx: StepContext) -> np.ndarray:
        return SchedulerObservation.from_filter(ctx.fs, ctx.clients).compact()

    def action_values(self, obs: np.ndarray) -> np.ndarray:
        q, _ = forward(self.dqn.online, obs, mode="eval")
        return q

    def decide(self, ctx: StepContext) -> int:
        self._obs_now = self.observe(ctx)
        q = self.action_values(self._obs_now)
        index = epsilon_greedy(q, self.dqn.epsilon, self.streams[StreamName.EXPLORATION])
        return index + self.action_offset

    def learn(self, ctx: StepContext, p: int, r: float) -> None:
        dqn = self.dqn
        if self._obs_prev is not None:
            self.buffer.push(ReplayTuple(o_prev=self._obs_prev, p=p, r=r, o_next=self._obs_now),
                             self.batch_size)

        dqn.eta += 1
        if dqn.eta >= self.params.sync_every:
            copy_weights(dqn.online, dqn.target)
            dqn.eta = 0
            logger.debug("Target network synchronized", {"t": ctx.t})

        if self.buffer.count >= self.batch_size:
            self._train()
        elif not self._warned_cold:
            logger.debug("Training skipped until the replay buffer holds a minibatch", {
                "t": ctx.t,
                "batch_size": self.batch_size,
            })
            self._warned_cold = True

        dqn.epsilon = decay_epsilon(dqn.epsilon)
        self._obs_prev = self._obs_now

    def _train(self) -> None:
        dqn = self.dqn
        batch = self.buffer.sample(self.batch_size, self.streams[StreamName.MINIBATCH])
        targets = target_values(batch, dqn.target, dqn.gamma)

        inputs = np.stack([item.o_prev for item in batch])
        actions = np.array([item.p - self.action_offset for item in batch])
        q, cache = forward(dqn.online, inputs, mode="train", rng=self.streams[StreamName.DROPOUT])
        loss, out_grads = dqn_loss(q, actions, targets)

        grads = clip_gradients(backward(dqn.online, cache, out_grads), dqn.delta)
        rmsprop_step(dqn.online, grads, dqn.rmsprop)
        self.trainings += 1
        self.last_loss = loss

    def diagnostics(self) -> Dict[str, Any]:
        return {
            "epsilon": self.dqn.epsilon,
            "eta": self.dqn.eta,
            "buffer": self.buffer.count,
            "trainings": self.trainings,
            "last_loss": self.last_loss,
        }

    def snapshot(self) -> Dict[str, Any]:
        return {
            "scheduler": self.name,
            "epsilon": self.dqn.epsilon,
            "online": self.dqn.online.to_dict(),
        }
