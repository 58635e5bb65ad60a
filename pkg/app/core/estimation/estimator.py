"""Cubature quadrature Kalman filter with Holt-smoothed dynamics.

The edge node does not know the state dynamics, so the prediction step
pushes the sampling points through Holt's linear-trend smoother instead of
f(.). A ``known`` propagator substitutes the true dynamics, which turns the
filter into a testable oracle.
"""

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from app.core.errors import DomainError, InnovationSingularError
from app.core.estimation.cqpoints import CQPointSet
from app.core.utils.logger import get_logger
from app.core.utils.numerics import cholesky, ensure_spd, symmetrize
from app.core.world.dynamics import Transmission

logger = get_logger(__name__)

CROSS_COV_MODES = ("lagged", "standard")
MEASUREMENT_UPDATE_MODES = ("full", "scalar")


@dataclass(frozen=True)
class HoltParams:
    """Smoothing constants (varpi, varsigma) with level ``a`` and trend ``b``."""

    varpi: float
    varsigma: float
    a: np.ndarray
    b: np.ndarray

    @classmethod
    def zeros(cls, dim: int, varpi: float, varsigma: float) -> "HoltParams":
        return cls(varpi=varpi, varsigma=varsigma, a=np.zeros(dim), b=np.zeros(dim))


@dataclass(frozen=True)
class Propagator:
    """``holt`` (learned surrogate) or ``known`` (exact dynamics ``f``)."""

    kind: str = "holt"
    f: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @classmethod
    def holt(cls) -> "Propagator":
        return cls(kind="holt")

    @classmethod
    def known(cls, f: Callable[[np.ndarray], np.ndarray]) -> "Propagator":
        return cls(kind="known", f=f)


@dataclass(frozen=True)
class FilterState:
    x_pri: np.ndarray
    x_pos: np.ndarray
    psi_pri: np.ndarray
    psi_pos: np.ndarray
    holt: HoltParams
    zstar_prev: Optional[np.ndarray] = None

    @classmethod
    def initial(cls, dim: int, holt: HoltParams) -> "FilterState":
        """``x_pos(0) = 0``, ``Psi_pos(0) = I``; priors mirror the posterior."""
        return cls(
            x_pri=np.zeros(dim),
            x_pos=np.zeros(dim),
            psi_pri=np.eye(dim),
            psi_pos=np.eye(dim),
            holt=holt,
        )

    def with_posterior_from_prior(self) -> "FilterState":
        return replace(self, x_pos=self.x_pri.copy(), psi_pos=self.psi_pri.copy())


def holt_transform(z: np.ndarray, hp: HoltParams) -> np.ndarray:
    """Holt forecast applied to each sampling point (rows of ``z``).

    The first two terms add up to ``(1 + varsigma) z``; they are kept in the
    written form.
    """
    varpi, varsigma = hp.varpi, hp.varsigma
    return (varpi * (1.0 + varsigma) * z
            + (1.0 + varsigma) * (1.0 - varpi) * z
            - varsigma * hp.a
            + (1.0 - varsigma) * hp.b)


def holt_update(hp: HoltParams, x_pos_prev: np.ndarray) -> HoltParams:
    """Advance level and trend from the previous posterior mean."""
    a_new = hp.varpi * x_pos_prev + (1.0 - hp.varpi) * hp.a
    b_new = hp.varsigma * (a_new - hp.a) + (1.0 - hp.varsigma) * hp.b
    return replace(hp, a=a_new, b=b_new)


def _weighted_cov(left: np.ndarray, right: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return (left.T * weights) @ right


def predict(fs: FilterState, sigma_v1: np.ndarray, pts: CQPointSet, prop: Propagator) -> FilterState:
    """Prior mean/covariance from the previous posterior; stores the propagated points."""
    factor = cholesky(fs.psi_pos)
    z = pts.spread(fs.x_pos, factor)

    if prop.kind == "holt":
        zstar = holt_transform(z, fs.holt)
        holt = holt_update(fs.holt, fs.x_pos)
    elif prop.kind == "known":
        zstar = np.array([prop.f(point) for point in z])
        holt = fs.holt
    else:
        raise DomainError(f"unknown propagator '{prop.kind}'")

    w = pts.weights
    x_pri = w @ zstar
    psi_pri = _weighted_cov(zstar, zstar, w) - np.outer(x_pri, x_pri) + sigma_v1
    return replace(
        fs,
        x_pri=x_pri,
        psi_pri=symmetrize(psi_pri),
        holt=holt,
        zstar_prev=zstar,
    )


@dataclass(frozen=True)
class MeasurementGain:
    """What a reading of one sensor would do to the prior.

    ``x_pos = x_pri + gain * (y - y_hat)``; ``psi_pos`` does not depend on ``y``.
    """

    sensor: int
    gain: np.ndarray
    y_hat: float
    y_var: float
    psi_pos: np.ndarray


def measurement_gain(fs: FilterState, sigma_v2: np.ndarray, h: np.ndarray, pts: CQPointSet,
                     p: int, cross_cov: str = "lagged",
                     measurement_update: str = "full") -> MeasurementGain:
    """Gain column, predicted reading and posterior covariance for sensor ``p`` (1-based).

    ``cross_cov='lagged'`` pairs the propagated prediction points with the
    measurement points; ``'standard'`` pairs the current prior points.
    ``measurement_update='full'`` uses the full N-dimensional gain with the
    sensor selector; ``'scalar'`` uses the gain of the polled row alone.
    """
    if not 1 <= p <= h.shape[0]:
        raise DomainError(f"sensor index {p} outside 1..{h.shape[0]}")

    w = pts.weights
    factor = cholesky(fs.psi_pri)
    z = pts.spread(fs.x_pri, factor)
    zstar = z @ h.T
    y_hat = w @ zstar
    psi_yy = _weighted_cov(zstar, zstar, w) - np.outer(y_hat, y_hat) + sigma_v2

    if cross_cov == "lagged":
        if fs.zstar_prev is None:
            raise DomainError("update requires the propagated points of the same step's predict")
        x_points = fs.zstar_prev
    elif cross_cov == "standard":
        x_points = z
    else:
        raise DomainError(f"unknown cross_cov mode '{cross_cov}'")
    psi_xy = _weighted_cov(x_points, zstar, w) - np.outer(fs.x_pri, y_hat)

    idx = p - 1

    if measurement_update == "full":
        try:
            gain = np.linalg.solve(psi_yy.T, psi_xy.T).T
        except np.linalg.LinAlgError as exc:
            raise InnovationSingularError() from exc
        column = gain[:, idx]
        psi_pos = fs.psi_pri - gain @ psi_yy @ gain.T
    elif measurement_update == "scalar":
        s = psi_yy[idx, idx]
        if not s > 0.0:
            raise InnovationSingularError()
        gain = column = psi_xy[:, idx] / s
        psi_pos = fs.psi_pri - s * np.outer(column, column)
    else:
        raise DomainError(f"unknown measurement_update mode '{measurement_update}'")

    if not np.all(np.isfinite(gain)):
        raise InnovationSingularError()

    return MeasurementGain(
        sensor=p,
        gain=column,
        y_hat=float(y_hat[idx]),
        y_var=float(h[idx] @ fs.psi_pri @ h[idx]),
        psi_pos=ensure_spd(psi_pos),
    )


def update(fs: FilterState, sigma_v2: np.ndarray, h: np.ndarray, pts: CQPointSet,
           y: float, p: int, cross_cov: str = "lagged",
           measurement_update: str = "full") -> FilterState:
    """Posterior from the prior and the reading ``y`` of sensor ``p`` (1-based)."""
    mg = measurement_gain(fs, sigma_v2, h, pts, p, cross_cov=cross_cov,
                          measurement_update=measurement_update)
    x_pos = fs.x_pri + mg.gain * (y - mg.y_hat)
    return replace(fs, x_pos=x_pos, psi_pos=mg.psi_pos)


class CubatureQuadratureFilter:
    """Binds the noise model, observation matrix and point set of one experiment."""

    def __init__(self, sigma_v1: np.ndarray, sigma_v2: np.ndarray, h: np.ndarray,
                 pts: CQPointSet, propagator: Propagator,
                 cross_cov: str = "lagged", measurement_update: str = "full"):
        if cross_cov not in CROSS_COV_MODES:
            raise DomainError(f"unknown cross_cov mode '{cross_cov}'")
        if measurement_update not in MEASUREMENT_UPDATE_MODES:
            raise DomainError(f"unknown measurement_update mode '{measurement_update}'")
        self.sigma_v1 = sigma_v1
        self.sigma_v2 = sigma_v2
        self.h = h
        self.pts = pts
        self.propagator = propagator
        self.cross_cov = cross_cov
        self.measurement_update = measurement_update

    @property
    def n_sensors(self) -> int:
        return self.h.shape[0]

    def predict(self, fs: FilterState) -> FilterState:
        return predict(fs, self.sigma_v1, self.pts, self.propagator)

    def gain(self, fs: FilterState, p: int) -> MeasurementGain:
        return measurement_gain(fs, self.sigma_v2, self.h, self.pts, p,
                                cross_cov=self.cross_cov, measurement_update=self.measurement_update)

    def update(self, fs: FilterState, y: float, p: int) -> FilterState:
        return update(fs, self.sigma_v2, self.h, self.pts, y, p,
                      cross_cov=self.cross_cov, measurement_update=self.measurement_update)

    def posterior(self, fs: FilterState, delivery: Optional[Transmission]) -> FilterState:
        """Update on a delivered reading, otherwise copy the prior into the posterior."""
        if delivery is None or not delivery.delivered:
            return fs.with_posterior_from_prior()
        return self.update(fs, delivery.value, delivery.sensor)

    def step(self, fs: FilterState, delivery: Optional[Transmission]) -> FilterState:
        return self.posterior(self.predict(fs), delivery)


def filter_step(fs: FilterState, sigma_v1: np.ndarray, sigma_v2: np.ndarray, h: np.ndarray,
                pts: CQPointSet, prop: Propagator, delivery: Optional[Transmission],
                cross_cov: str = "lagged", measurement_update: str = "full") -> FilterState:
    """Predict, then update iff ``delivery`` carries a reading."""
    cqkf = CubatureQuadratureFilter(sigma_v1, sigma_v2, h, pts, prop,
                                    cross_cov=cross_cov, measurement_update=measurement_update)
    return cqkf.step(fs, delivery)
