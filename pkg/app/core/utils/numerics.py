"""Numerical primitives shared by the filter, the world and the schedulers.

Cholesky with a jitter schedule, the Gamma function, the Chebyshev-Laguerre
polynomial used for radial quadrature nodes and its roots, Horner evaluation,
and seeded Gaussian sampling on named random streams.
"""

from enum import IntEnum
from math import comb
from typing import Dict, Tuple, Union

import numpy as np
from scipy import optimize, special

from app.core.errors import DomainError, NotPositiveDefiniteError, RootIsolationError
from app.core.utils.logger import get_logger

logger = get_logger(__name__)

JITTER_START = 1e-9
JITTER_RETRIES = 8
ROOT_TOL = 1e-10
ROOT_SCAN_PER_DEGREE = 400

ArrayLike = Union[np.ndarray, list, tuple]


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------

class StreamName(IntEnum):
    """Stream ids carved out of one master seed."""

    DYNAMICS = 0
    MEASUREMENT = 1
    CHANNEL = 2
    EXPLORATION = 3
    MSE_SAMPLING = 4
    WEIGHT_INIT = 5
    CLIENTS = 6
    MINIBATCH = 7
    DROPOUT = 8
    WHATIF = 9


class RngStream:
    """Seeded generator identified by ``(seed, stream_id)``.

    Equal pairs reproduce the same sequence; distinct stream ids are
    independent children of the same ``SeedSequence`` entropy.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def uniform(self) -> float:
        return float(self.generator.random())

    def standard_normal(self, size=None) -> np.ndarray:
        return self.generator.standard_normal(size)

    def integers(self, low: int, high: int, size=None):
        return self.generator.integers(low, high, size=size)

    def choice(self, n: int, size: int, replace: bool = False) -> np.ndarray:
        return self.generator.choice(n, size=size, replace=replace)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


class StreamFamily:
    """Lazily creates one ``RngStream`` per ``StreamName`` for a master seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._streams: Dict[StreamName, RngStream] = {}

    def __getitem__(self, name: StreamName) -> RngStream:
        if name not in self._streams:
            self._streams[name] = RngStream(self.seed, int(name))
        return self._streams[name]


# ---------------------------------------------------------------------------
# Linear algebra
# ---------------------------------------------------------------------------

def symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def cholesky(m: ArrayLike) -> np.ndarray:
    """Lower-triangular factor of a symmetric positive definite matrix.

    The input is symmetrized first. When the factorization fails a jitter
    ``eps * I`` is added, starting at 1e-9 and doubling, for at most eight
    retries before ``NotPositiveDefiniteError`` is raised.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotPositiveDefiniteError(f"not positive definite: expected a square matrix, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NotPositiveDefiniteError("not positive definite: matrix has non-finite entries")

    m = symmetrize(m)
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        pass

    identity = np.eye(m.shape[0])
    eps = JITTER_START
    for attempt in range(1, JITTER_RETRIES + 1):
        try:
            factor = np.linalg.cholesky(m + eps * identity)
            logger.debug("Cholesky succeeded after jitter", {"eps": eps, "attempt": attempt})
            return factor
        except np.linalg.LinAlgError:
            eps *= 2.0

    raise NotPositiveDefiniteError(retries=JITTER_RETRIES)


# ---------------------------------------------------------------------------
# Special functions and Chebyshev-Laguerre polynomial
# ---------------------------------------------------------------------------

def gamma_fn(x: float) -> float:
    """Gamma function for positive reals (half-integers included)."""
    if not x > 0:
        raise DomainError(f"domain error: gamma_fn requires x > 0, got {x}")
    return float(special.gamma(x))


def cl_poly(nprime: int, iota: float) -> np.ndarray:
    """Monic Chebyshev-Laguerre polynomial of degree ``nprime``.

    Coefficients are returned in ascending powers, ``[l_0, ..., l_{n'-1}, 1]``,
    with the ratio ``(n'+iota)!/(n'+iota-k)!`` written through Gamma so that
    odd state dimensions (half-integer ``iota``) are supported.
    """
    if nprime < 1:
        raise DomainError(f"domain error: polynomial degree must be >= 1, got {nprime}")

    top = gamma_fn(nprime + iota + 1.0)
    coeffs = np.zeros(nprime + 1)
    for k in range(nprime + 1):
        ratio = top / gamma_fn(nprime + iota - k + 1.0)
        coeffs[nprime - k] = comb(nprime, k) * (-1.0) ** k * ratio
    coeffs[nprime] = 1.0
    return coeffs


def poly_eval_deriv(coeffs: ArrayLike, lam: float) -> Tuple[float, float]:
    """Horner evaluation of a polynomial (ascending coefficients) and its derivative."""
    value = 0.0
    deriv = 0.0
    for c in reversed(np.asarray(coeffs, dtype=float)):
        deriv = deriv * lam + value
        value = value * lam + c
    return float(value), float(deriv)


def companion_matrix(coeffs: ArrayLike) -> np.ndarray:
    """Companion matrix ``[[0, I], [-l_0, -l^T]]`` of a monic polynomial."""
    coeffs = np.asarray(coeffs, dtype=float)
    degree = len(coeffs) - 1
    d = np.zeros((degree, degree))
    if degree > 1:
        d[:-1, 1:] = np.eye(degree - 1)
    d[-1, :] = -coeffs[:-1]
    return d


def _newton_polish(coeffs: np.ndarray, root: float, max_iter: int = 50) -> float:
    for _ in range(max_iter):
        value, deriv = poly_eval_deriv(coeffs, root)
        if value == 0.0 or deriv == 0.0:
            break
        step = value / deriv
        root -= step
        if abs(step) <= 1e-15 * max(1.0, abs(root)):
            break
    return root


def cl_poly_roots(coeffs: ArrayLike, method: str = "bisection") -> np.ndarray:
    """Real roots of a Chebyshev-Laguerre polynomial in ascending order.

    ``bisection`` scans the bracket ``(0, 4n' + 2*iota + 2)`` for sign changes,
    solves each with Brent's method and polishes with Newton. ``companion``
    takes the eigenvalues of the companion matrix and polishes them the same
    way.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    degree = len(coeffs) - 1

    if method == "companion":
        eigenvalues = np.linalg.eigvals(companion_matrix(coeffs))
        roots = np.sort(eigenvalues.real)
    elif method == "bisection":
        # iota from the n'-1 coefficient: l_{n'-1} = -n'(n'+iota)
        iota = -coeffs[degree - 1] / degree - degree
        upper = 4.0 * degree + 2.0 * iota + 2.0
        grid = np.linspace(0.0, upper, ROOT_SCAN_PER_DEGREE * degree + 1)
        values = np.polynomial.polynomial.polyval(grid, coeffs)

        roots_found = []
        for i in range(len(grid) - 1):
            lo_val, hi_val = values[i], values[i + 1]
            if lo_val == 0.0 and i > 0:
                roots_found.append(grid[i])
            elif lo_val * hi_val < 0.0:
                roots_found.append(optimize.brentq(
                    lambda lam: poly_eval_deriv(coeffs, lam)[0], grid[i], grid[i + 1], xtol=1e-15
                ))
        roots = np.asarray(roots_found)
    else:
        raise DomainError(f"unknown root method '{method}'")

    if len(roots) < degree:
        raise RootIsolationError(found=len(roots), expected=degree)

    polished = np.array([_newton_polish(coeffs, float(r)) for r in roots[:degree]])
    residual = max(abs(poly_eval_deriv(coeffs, r)[0]) for r in polished)
    if np.any(polished <= 0.0) or residual >= ROOT_TOL:
        raise RootIsolationError(found=int(np.sum(polished > 0.0)), expected=degree)
    return np.sort(polished)


# ---------------------------------------------------------------------------
# Gaussian sampling
# ---------------------------------------------------------------------------

def gaussian_sample(mean: ArrayLike, cov: ArrayLike, rng: RngStream) -> np.ndarray:
    """One draw from ``N(mean, cov)`` as ``mean + L z``.

    An all-zero covariance short-circuits to the mean without consuming
    random numbers.
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if not np.any(cov):
        return mean.copy()
    factor = cholesky(cov)
    return mean + factor @ rng.standard_normal(mean.shape[0])


def gaussian_samples(mean: ArrayLike, cov: ArrayLike, rng: RngStream, size: int) -> np.ndarray:
    """``size`` draws from ``N(mean, cov)`` stacked as rows."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if not np.any(cov):
        return np.tile(mean, (size, 1))
    factor = cholesky(cov)
    z = rng.standard_normal((size, mean.shape[0]))
    return mean + z @ factor.T


def ensure_spd(m: ArrayLike) -> np.ndarray:
    """Symmetrize ``m`` and, only if it does not factor, lift it back to SPD.

    A matrix that already factors is returned symmetrized but otherwise
    untouched. Otherwise the jitter schedule of ``cholesky`` is tried and, as
    a last resort, eigenvalues are floored at the starting jitter.
    """
    m = symmetrize(np.asarray(m, dtype=float))
    try:
        np.linalg.cholesky(m)
        return m
    except np.linalg.LinAlgError:
        pass

    identity = np.eye(m.shape[0])
    eps = JITTER_START
    for _ in range(JITTER_RETRIES):
        try:
            np.linalg.cholesky(m + eps * identity)
            logger.warning("Covariance jittered back to SPD", {"eps": eps})
            return m + eps * identity
        except np.linalg.LinAlgError:
            eps *= 2.0

    eigenvalues, eigenvectors = np.linalg.eigh(m)
    floored = np.maximum(eigenvalues, JITTER_START)
    logger.warning("Covariance eigenvalues floored", {"min_eigenvalue": float(eigenvalues.min())})
    return symmetrize((eigenvectors * floored) @ eigenvectors.T)
