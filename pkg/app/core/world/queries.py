"""Client queries, client query processes, response MSE and the scheduler reward."""

from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.errors import DomainError
from app.core.utils.logger import get_logger
from app.core.utils.numerics import RngStream, gaussian_samples

logger = get_logger(__name__)

QUERY_KINDS = ("current_state", "maximum", "count_range", "sample_mean", "sample_variance")
TAU_CAP = 1_000_000
STATE_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


@dataclass(frozen=True)
class QueryFn:
    kind: str
    beta1: float = 0.0
    beta2: float = 0.0

    def __post_init__(self):
        if self.kind not in QUERY_KINDS:
            raise DomainError(f"unknown query '{self.kind}', expected one of {QUERY_KINDS}")
        if self.kind == "count_range" and self.beta1 > self.beta2:
            raise DomainError(f"count_range needs beta1 <= beta2, got [{self.beta1}, {self.beta2}]")


def eval_query(q: QueryFn, x: np.ndarray) -> Union[float, np.ndarray]:
    """``z_c(x)``; ``x`` may be one state or a stack of states (rows)."""
    x = np.asarray(x, dtype=float)
    if q.kind == "current_state":
        return x.copy()
    if q.kind == "maximum":
        result = np.max(x, axis=-1)
    elif q.kind == "count_range":
        result = np.sum((x >= q.beta1) & (x <= q.beta2), axis=-1).astype(float)
    elif q.kind == "sample_mean":
        result = np.mean(x, axis=-1)
    else:
        if x.shape[-1] < 2:
            raise DomainError("undefined variance: sample_variance needs M >= 2")
        result = np.var(x, axis=-1, ddof=1)
    return float(result) if np.ndim(result) == 0 else result


# ---------------------------------------------------------------------------
# Client processes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodicChain:
    """Cycles A -> B -> ... -> A; entering A issues a query."""

    period: int
    state: int = 0

    @property
    def letter(self) -> str:
        return STATE_LETTERS[self.state]

    @classmethod
    def from_letter(cls, period: int, letter: str) -> "PeriodicChain":
        index = STATE_LETTERS.index(letter.upper())
        if index >= period:
            raise DomainError(f"initial state {letter} does not exist in a {period}-state chain")
        return cls(period=period, state=index)


@dataclass(frozen=True)
class MemorylessChain:
    """Issues a query with probability ``q`` each step, independently."""

    q: float


@dataclass(frozen=True)
class ClientProcess:
    client_id: int
    query: QueryFn
    chain: Union[PeriodicChain, MemorylessChain]
    tau: int = 0
    alpha: float = 1.0


def advance_client(cp: ClientProcess, rng: RngStream) -> Tuple[ClientProcess, bool]:
    """Move the client's chain one step; ``tau`` resets on a query, else increments."""
    chain = cp.chain
    if isinstance(chain, PeriodicChain):
        next_state = (chain.state + 1) % chain.period
        queried = next_state == 0
        chain = replace(chain, state=next_state)
    else:
        queried = rng.uniform() < chain.q

    tau = 0 if queried else min(cp.tau + 1, TAU_CAP)
    return replace(cp, chain=chain, tau=tau), queried


# ---------------------------------------------------------------------------
# Responses and MSE
# ---------------------------------------------------------------------------

def response_spread(values: np.ndarray) -> float:
    """Sample variance (ddof=1) of query responses; vector responses sum their components."""
    # shifting by one response keeps identical responses at exactly zero spread
    centred = values - values[0]
    if values.ndim == 1:
        return float(np.var(centred, ddof=1))
    return float(np.sum(np.var(centred, axis=0, ddof=1)))


def estimate_query_mse(x_pos: np.ndarray, psi_pos: np.ndarray, q: QueryFn, S: int,
                       rng: RngStream, samples: Optional[np.ndarray] = None) -> float:
    """Sample variance of ``z_c`` over ``S`` posterior draws.

    For ``current_state`` the per-component variances are summed.
    """
    if S < 2:
        raise DomainError(f"sample variance needs S >= 2, got {S}")
    if samples is None:
        samples = gaussian_samples(x_pos, psi_pos, rng, S)
    return response_spread(np.asarray(eval_query(q, samples)))


def respond(x_pos: np.ndarray, q: QueryFn, samples: Optional[np.ndarray] = None):
    """Plug-in response ``z_c(x_pos)``, or the mean of ``z_c`` over ``samples`` when given."""
    if samples is None:
        return eval_query(q, x_pos)
    values = np.asarray(eval_query(q, samples))
    return values.mean(axis=0) if values.ndim > 1 else float(values.mean())


def analytic_query_mse(x_pos: np.ndarray, psi_pos: np.ndarray, q: QueryFn) -> float:
    """Closed-form response variance where one exists.

    ``current_state``: trace(Psi). ``sample_mean``: 1'Psi1/M^2.
    ``sample_variance``: quadratic form x'Ax with A = (I - 11'/M)/(M-1),
    Var = 2 tr(A Psi A Psi) + 4 mu'A Psi A mu.
    """
    m = x_pos.shape[0]
    if q.kind == "current_state":
        return float(np.trace(psi_pos))
    if q.kind == "sample_mean":
        return float(psi_pos.sum() / m ** 2)
    if q.kind == "sample_variance":
        if m < 2:
            raise DomainError("undefined variance: sample_variance needs M >= 2")
        a = (np.eye(m) - np.full((m, m), 1.0 / m)) / (m - 1)
        a_psi = a @ psi_pos
        return float(2.0 * np.trace(a_psi @ a_psi) + 4.0 * x_pos @ a_psi @ a @ x_pos)
    raise DomainError(f"no closed-form response MSE for '{q.kind}'")


def reward(mses: Dict[int, float], clients: Sequence[ClientProcess], p: int, mu: float,
           psi_pos: np.ndarray, idle_reward: str = "trace") -> float:
    """Reward of action ``p``.

    With at least one query: ``-sum alpha_c MSE_c 1(tau_c == 0)``. Without:
    ``-mu^{1(p==0)} trace(Psi_pos)``, or 0 when ``idle_reward='zero'``.
    """
    if mses:
        total = 0.0
        for client in clients:
            if client.tau == 0 and client.client_id in mses:
                total += client.alpha * mses[client.client_id]
        return -total
    if idle_reward == "zero":
        return 0.0
    scale = mu if p == 0 else 1.0
    return -scale * float(np.trace(psi_pos))
