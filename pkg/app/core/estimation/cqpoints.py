"""Cubature-quadrature point sets.

A point set combines the 2M axis intersections of the unit M-sphere
(cubature directions) with the n' roots of the Chebyshev-Laguerre polynomial
(radial quadrature nodes), giving 2Mn' weighted points whose weighted first
and second moments are those of a standard normal.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Any, Dict

import numpy as np

from app.core.errors import DomainError, SimulationError
from app.core.utils.logger import get_logger
from app.core.utils.numerics import cl_poly, cl_poly_roots, gamma_fn, poly_eval_deriv

logger = get_logger(__name__)

WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class CQPointSet:
    """Read-only point set: ``points`` is (2Mn', M), ``weights`` is (2Mn',)."""

    dim: int
    nprime: int
    points: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def spread(self, mean: np.ndarray, factor: np.ndarray) -> np.ndarray:
        """Sampling points ``L xi_i + mean`` as rows."""
        return self.points @ factor.T + mean

    def to_dict(self) -> Dict[str, Any]:
        return {
            "M": self.dim,
            "nprime": self.nprime,
            "weights": self.weights.tolist(),
            "points": self.points.tolist(),
        }


def cubature_directions(dim: int) -> np.ndarray:
    """``+e_1 .. +e_M`` followed by ``-e_1 .. -e_M``."""
    identity = np.eye(dim)
    return np.vstack([identity, -identity])


@lru_cache(maxsize=32)
def generate(dim: int, nprime: int, root_method: str = "bisection") -> CQPointSet:
    """Build the 2Mn' point set for state dimension ``dim`` and radial order ``nprime``.

    Point ``j' + (j-1)n'`` pairs direction ``j`` with quadrature root ``j'``.
    The weights must sum to one; a violation raises instead of renormalizing.
    """
    if dim < 1 or nprime < 1:
        raise DomainError(f"domain error: need M >= 1 and n' >= 1, got M={dim}, n'={nprime}")

    iota = dim / 2.0 - 1.0
    coeffs = cl_poly(nprime, iota)
    roots = cl_poly_roots(coeffs, method=root_method)

    scale = factorial(nprime) / (2.0 * dim) * gamma_fn(iota + nprime + 1.0) / gamma_fn(dim / 2.0)
    radial_weights = np.array([
        scale / (lam * poly_eval_deriv(coeffs, lam)[1] ** 2) for lam in roots
    ])
    radii = np.sqrt(2.0 * roots)

    directions = cubature_directions(dim)
    points = (directions[:, None, :] * radii[None, :, None]).reshape(-1, dim)
    weights = np.tile(radial_weights, 2 * dim)

    total = float(weights.sum())
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise SimulationError(f"CQ weights sum to {total!r}, expected 1 (M={dim}, n'={nprime})")

    points.setflags(write=False)
    weights.setflags(write=False)
    logger.debug("CQ point set generated", {"M": dim, "nprime": nprime, "points": len(weights)})
    return CQPointSet(dim=dim, nprime=nprime, points=points, weights=weights)
