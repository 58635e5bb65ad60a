"""Ground-truth world: nonlinear state evolution, sensor readings, erasure channel."""

from dataclasses import dataclass, field
from math import ceil
from typing import Callable, Dict, Optional

import numpy as np

from app.core.errors import DomainError
from app.core.utils.logger import get_logger
from app.core.utils.numerics import RngStream, gaussian_sample

logger = get_logger(__name__)

Nlsd = Callable[[np.ndarray], np.ndarray]


def nlsd_logistic(x: np.ndarray) -> np.ndarray:
    """``x + 0.05 x (1 - x^2)`` componentwise; uncorrelated components."""
    x = np.asarray(x, dtype=float)
    return x + 0.05 * x * (1.0 - x * x)


def nlsd_roll(x: np.ndarray) -> np.ndarray:
    """``x_m * x_{m+1}`` with wrap-around; couples neighbouring components."""
    x = np.asarray(x, dtype=float)
    return x * np.roll(x, -1)


NLSD_FUNCTIONS: Dict[str, Nlsd] = {
    "logistic": nlsd_logistic,
    "roll": nlsd_roll,
}


def register_nlsd(name: str, fn: Nlsd) -> None:
    """Make a custom dynamics function selectable by name."""
    NLSD_FUNCTIONS[name] = fn


def resolve_nlsd(name: str) -> Nlsd:
    try:
        return NLSD_FUNCTIONS[name]
    except KeyError:
        raise DomainError(f"unknown NLSD '{name}', known: {sorted(NLSD_FUNCTIONS)}") from None


@dataclass
class WorldConfig:
    """Numeric world parameters (arrays already built)."""

    sigma_v1: np.ndarray
    sigma_v2: np.ndarray
    h: np.ndarray
    nlsd: str = "logistic"
    x0: Optional[np.ndarray] = None
    f: Nlsd = field(init=False, repr=False)

    def __post_init__(self):
        self.sigma_v1 = np.asarray(self.sigma_v1, dtype=float)
        self.sigma_v2 = np.asarray(self.sigma_v2, dtype=float)
        self.h = np.atleast_2d(np.asarray(self.h, dtype=float))
        if self.sigma_v1.shape != (self.m, self.m):
            raise DomainError(f"Σ_v1 must be {self.m}x{self.m}, got {self.sigma_v1.shape}")
        if self.sigma_v2.shape != (self.n, self.n):
            raise DomainError(f"Σ_v2 must be {self.n}x{self.n}, got {self.sigma_v2.shape}")
        if self.x0 is None:
            self.x0 = np.zeros(self.m)
        self.x0 = np.asarray(self.x0, dtype=float)
        self.f = resolve_nlsd(self.nlsd)

    @property
    def m(self) -> int:
        return self.h.shape[1]

    @property
    def n(self) -> int:
        return self.h.shape[0]


@dataclass(frozen=True)
class WorldState:
    t: int
    x: np.ndarray


@dataclass(frozen=True)
class Transmission:
    """Channel outcome for one polled reading."""

    sensor: int
    delivered: bool
    value: Optional[float] = None


def initial_state(cfg: WorldConfig) -> WorldState:
    return WorldState(t=0, x=cfg.x0.copy())


def step_state(w: WorldState, cfg: WorldConfig, rng: RngStream) -> WorldState:
    """``x(t) = f(x(t-1)) + v_1(t)``."""
    noise = gaussian_sample(np.zeros(cfg.m), cfg.sigma_v1, rng)
    return WorldState(t=w.t + 1, x=cfg.f(w.x) + noise)


def observe(w: WorldState, cfg: WorldConfig, rng: RngStream) -> np.ndarray:
    """Full reading vector ``H x(t) + v_2(t)``; the caller reveals one component."""
    noise = gaussian_sample(np.zeros(cfg.n), cfg.sigma_v2, rng)
    return cfg.h @ w.x + noise


def erasure_prob(p: int) -> float:
    """``0.02 * ceil((p-1)/10)`` for sensor ``p`` (1-based)."""
    if p < 1:
        raise DomainError("no transmission has no erasure probability")
    return 0.02 * ceil((p - 1) / 10)


def transmit(p: int, y_p: float, rng: RngStream) -> Transmission:
    """Deliver ``y_p`` iff a uniform draw is at least the sensor's erasure probability."""
    theta = rng.uniform()
    delivered = theta >= erasure_prob(p)
    if not delivered:
        logger.debug("Packet erased", {"sensor": p, "theta": theta})
    return Transmission(sensor=p, delivered=delivered, value=float(y_p) if delivered else None)
