"""Experiment configuration.

Every simulation default lives here, so an empty JSON object plus a client
preset reproduces the reference setup. ``ExperimentConfig.build_*`` helpers
turn the validated model into the numeric objects the core consumes.
"""

from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator, model_validator

from app.core.errors import DomainError
from app.core.estimation.estimator import HoltParams, Propagator
from app.core.schedulers.proposed import DqnParams
from app.core.world.dynamics import WorldConfig, resolve_nlsd
from app.core.world.queries import ClientProcess, MemorylessChain, PeriodicChain, QueryFn

Matrix = Union[float, List[List[float]]]

NLSD_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "logistic": {"varpi": 0.77, "varsigma": 0.02, "beta": (-0.5, -0.2)},
    "roll": {"varpi": 0.75, "varsigma": 0.025, "beta": (-0.2, -0.1)},
}
PERIOD_C2 = 6
PERIOD_C4 = 12
MEMORYLESS_Q = 1.0 / 6.0

# alternative spellings of the default variants
MODE_ALIASES: Dict[str, Dict[str, str]] = {
    "cross_cov": {"paper": "lagged"},
    "measurement_update": {"paper": "full"},
    "eviction": {"paper": "batch_slot"},
}


def _resolve_mode_alias(field: str, value: Any) -> Any:
    if isinstance(value, str):
        return MODE_ALIASES.get(field, {}).get(value, value)
    return value


class SchedulerKind(str, Enum):
    PROPOSED = "proposed"
    BENCHMARK_DRL = "benchmark_drl"
    MONTECARLO = "montecarlo"


class QueryKind(str, Enum):
    CURRENT_STATE = "current_state"
    MAXIMUM = "maximum"
    COUNT_RANGE = "count_range"
    SAMPLE_MEAN = "sample_mean"
    SAMPLE_VARIANCE = "sample_variance"


class ChainType(str, Enum):
    PERIODIC = "periodic"
    MEMORYLESS = "memoryless"


class Preset(str, Enum):
    C1 = "c1"
    C2 = "c2"
    C3 = "c3"
    C4 = "c4"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class WorldSettings(_Strict):
    """``sigma_v1``/``sigma_v2`` accept a scalar (times identity) or a full matrix; ``H`` defaults to I."""

    M: int = Field(default=20, ge=1)
    N: int = Field(default=20, ge=1)
    sigma_v1: Matrix = 2.5e-3
    sigma_v2: Matrix = 1.0
    H: Optional[List[List[float]]] = None
    nlsd: str = "logistic"
    x0: Optional[List[float]] = None

    @field_validator("nlsd")
    @classmethod
    def validate_nlsd(cls, value: str) -> str:
        try:
            resolve_nlsd(value)
        except DomainError as exc:
            raise ValueError(str(exc)) from None
        return value

    @model_validator(mode="after")
    def check_shapes(self) -> "WorldSettings":
        if self.H is None and self.M != self.N:
            raise ValueError("H must be given when M != N")
        if self.H is not None and np.asarray(self.H).shape != (self.N, self.M):
            raise ValueError(f"H must be {self.N}x{self.M}")
        for name, dim in (("sigma_v1", self.M), ("sigma_v2", self.N)):
            value = getattr(self, name)
            if isinstance(value, (int, float)):
                if value < 0:
                    raise ValueError(f"{name} must be non-negative")
            else:
                arr = np.asarray(value, dtype=float)
                if arr.shape != (dim, dim) or not np.allclose(arr, arr.T):
                    raise ValueError(f"{name} must be a symmetric {dim}x{dim} matrix")
                if np.linalg.eigvalsh(arr).min() < -1e-12:
                    raise ValueError(f"{name} must be positive semidefinite")
        if self.x0 is not None and len(self.x0) != self.M:
            raise ValueError(f"x0 must have length {self.M}")
        return self

    def matrix(self, name: str) -> np.ndarray:
        value = getattr(self, name)
        dim = self.M if name == "sigma_v1" else self.N
        if isinstance(value, (int, float)):
            return float(value) * np.eye(dim)
        return np.asarray(value, dtype=float)


class FilterSettings(_Strict):
    nprime: int = Field(default=2, ge=1)
    varpi: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    varsigma: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    propagator: str = Field(default="holt", pattern="^(holt|known)$")
    cross_cov: str = Field(default="lagged", pattern="^(lagged|standard)$")
    measurement_update: str = Field(default="full", pattern="^(full|scalar)$")

    @field_validator("cross_cov", "measurement_update", mode="before")
    @classmethod
    def resolve_alias(cls, value: Any, info: ValidationInfo) -> Any:
        return _resolve_mode_alias(info.field_name, value)

    @model_validator(mode="after")
    def check_update(self) -> "FilterSettings":
        # the Holt forecast inflates every component by (1 + varsigma) per step and a
        # single-row update only shrinks the polled one
        if self.propagator == "holt" and self.measurement_update == "scalar":
            raise ValueError("measurement_update 'scalar' diverges with the holt propagator; "
                             "use 'full' or propagator 'known'")
        return self


class NumericsSettings(_Strict):
    root_method: str = Field(default="bisection", pattern="^(bisection|companion)$")


class QuerySettings(_Strict):
    kind: QueryKind
    beta: Optional[Tuple[float, float]] = None

    @model_validator(mode="after")
    def check_beta(self) -> "QuerySettings":
        if self.beta is not None and self.beta[0] > self.beta[1]:
            raise ValueError("count_range needs beta[0] <= beta[1]")
        return self


class ChainSettings(_Strict):
    type: ChainType
    period: int = Field(default=PERIOD_C2, ge=1, le=26)
    initial_state: str = "A"
    q: float = Field(default=MEMORYLESS_Q, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def check_state(self) -> "ChainSettings":
        if self.type == ChainType.PERIODIC:
            try:
                PeriodicChain.from_letter(self.period, self.initial_state)
            except (DomainError, ValueError) as exc:
                raise ValueError(f"invalid initial state '{self.initial_state}': {exc}") from None
        return self


class ClientSettings(_Strict):
    query: QuerySettings
    chain: ChainSettings
    alpha: float = Field(default=1.0, ge=0.0, le=1.0)


class SchedulerSettings(_Strict):
    kind: SchedulerKind = SchedulerKind.PROPOSED
    gamma: float = Field(default=0.9, ge=0.0, le=1.0)
    delta: float = Field(default=5.0, gt=0.0)
    epsilon0: float = Field(default=1.0, ge=0.1, le=1.0)
    sync_every: int = Field(default=20, ge=1)
    lr: float = Field(default=1.0, gt=0.0)
    rho: float = Field(default=0.9, ge=0.0, lt=1.0)
    eps_opt: float = Field(default=1e-8, gt=0.0)
    init_range: Tuple[float, float] = (-0.3, 0.3)
    hidden: List[int] = Field(default_factory=lambda: [4])
    memory_factor: int = Field(default=100, ge=1)
    batch_factor: int = Field(default=30, ge=1)
    eviction: str = Field(default="batch_slot", pattern="^(batch_slot|fifo)$")
    whatif_reading: str = Field(default="running", pattern="^(running|prior)$")

    @field_validator("eviction", mode="before")
    @classmethod
    def resolve_alias(cls, value: Any, info: ValidationInfo) -> Any:
        return _resolve_mode_alias(info.field_name, value)

    @model_validator(mode="after")
    def check_batch(self) -> "SchedulerSettings":
        if self.batch_factor > self.memory_factor:
            raise ValueError("the minibatch cannot be larger than the replay memory")
        if self.init_range[0] > self.init_range[1]:
            raise ValueError("init_range must be ordered")
        return self


class OutputSettings(_Strict):
    filter_trace: bool = False
    weight_snapshot: bool = False


class ExperimentConfig(_Strict):
    preset: Optional[Preset] = None
    world: WorldSettings = Field(default_factory=WorldSettings)
    filter: FilterSettings = Field(default_factory=FilterSettings)
    numerics: NumericsSettings = Field(default_factory=NumericsSettings)
    clients: List[ClientSettings] = Field(default_factory=list)
    scheduler: SchedulerSettings = Field(default_factory=SchedulerSettings)
    mu: float = Field(default=0.1, gt=0.0, le=1.0)
    S: int = Field(default=100, ge=2)
    horizon: int = Field(default=4000, ge=1)
    warmup: int = Field(default=2000, ge=0)
    seed: int = Field(default=0, ge=0)
    output_dir: Optional[str] = None
    response: str = Field(default="plugin", pattern="^(plugin|sample_mean)$")
    outputs: OutputSettings = Field(default_factory=OutputSettings)

    @model_validator(mode="after")
    def resolve_defaults(self) -> "ExperimentConfig":
        if self.warmup >= self.horizon:
            raise ValueError(f"warmup ({self.warmup}) must be smaller than horizon ({self.horizon})")

        nlsd = NLSD_DEFAULTS.get(self.world.nlsd, NLSD_DEFAULTS["logistic"])
        if self.filter.varpi is None:
            self.filter.varpi = nlsd["varpi"]
        if self.filter.varsigma is None:
            self.filter.varsigma = nlsd["varsigma"]

        if not self.clients:
            self.clients = preset_clients(self.preset or Preset.C1)
        for client in self.clients:
            if client.query.kind == QueryKind.COUNT_RANGE and client.query.beta is None:
                client.query.beta = nlsd["beta"]
            if client.query.kind == QueryKind.SAMPLE_VARIANCE and self.world.M < 2:
                raise ValueError("undefined variance: sample_variance needs M >= 2")
        return self

    @property
    def n_clients(self) -> int:
        return len(self.clients)

    def build_world(self) -> WorldConfig:
        w = self.world
        h = np.eye(w.M) if w.H is None else np.asarray(w.H, dtype=float)
        x0 = None if w.x0 is None else np.asarray(w.x0, dtype=float)
        return WorldConfig(sigma_v1=w.matrix("sigma_v1"), sigma_v2=w.matrix("sigma_v2"),
                           h=h, nlsd=w.nlsd, x0=x0)

    def build_holt(self) -> HoltParams:
        return HoltParams.zeros(self.world.M, self.filter.varpi, self.filter.varsigma)

    def build_propagator(self, world: WorldConfig) -> Propagator:
        if self.filter.propagator == "known":
            return Propagator.known(world.f)
        return Propagator.holt()

    def build_clients(self) -> List[ClientProcess]:
        processes = []
        for index, entry in enumerate(self.clients, start=1):
            beta = entry.query.beta or (0.0, 0.0)
            query = QueryFn(kind=entry.query.kind.value, beta1=beta[0], beta2=beta[1])
            if entry.chain.type == ChainType.PERIODIC:
                chain = PeriodicChain.from_letter(entry.chain.period, entry.chain.initial_state)
            else:
                chain = MemorylessChain(q=entry.chain.q)
            processes.append(ClientProcess(client_id=index, query=query, chain=chain, alpha=entry.alpha))
        return processes

    def build_dqn(self) -> DqnParams:
        s = self.scheduler
        return DqnParams(
            gamma=s.gamma, mu=self.mu, delta=s.delta, epsilon0=s.epsilon0, sync_every=s.sync_every,
            lr=s.lr, rho=s.rho, eps_opt=s.eps_opt, init_range=tuple(s.init_range),
            hidden=tuple(s.hidden), memory_factor=s.memory_factor, batch_factor=s.batch_factor,
            eviction=s.eviction,
        )

    def echo(self) -> Dict[str, Any]:
        """JSON-ready copy with every default resolved."""
        return self.model_dump(mode="json")


def _client(kind: QueryKind, chain: ChainSettings) -> ClientSettings:
    return ClientSettings(query=QuerySettings(kind=kind), chain=chain)


def _periodic(period: int, letter: str) -> ChainSettings:
    return ChainSettings(type=ChainType.PERIODIC, period=period, initial_state=letter)


def _memoryless() -> ChainSettings:
    return ChainSettings(type=ChainType.MEMORYLESS, q=MEMORYLESS_Q)


def preset_clients(preset: Union[Preset, str]) -> List[ClientSettings]:
    """Client rosters: ``c1``-``c3`` pair a maximum and a count-range client, ``c4`` has four clients."""
    preset = Preset(preset)
    if preset == Preset.C1:
        return [_client(QueryKind.MAXIMUM, _periodic(PERIOD_C2, "D")),
                _client(QueryKind.COUNT_RANGE, _periodic(PERIOD_C2, "B"))]
    if preset == Preset.C2:
        return [_client(QueryKind.MAXIMUM, _memoryless()),
                _client(QueryKind.COUNT_RANGE, _memoryless())]
    if preset == Preset.C3:
        return [_client(QueryKind.MAXIMUM, _memoryless()),
                _client(QueryKind.COUNT_RANGE, _periodic(PERIOD_C2, "B"))]
    return [_client(QueryKind.MAXIMUM, _periodic(PERIOD_C4, "B")),
            _client(QueryKind.COUNT_RANGE, _periodic(PERIOD_C4, "D")),
            _client(QueryKind.SAMPLE_MEAN, _periodic(PERIOD_C4, "F")),
            _client(QueryKind.SAMPLE_VARIANCE, _periodic(PERIOD_C4, "H"))]
