"""Catalog Routes - CQ point sets and scheduler complexity

Seed-free lookups: nothing here runs a simulation.
"""

from fastapi import APIRouter, HTTPException, Query

from app.core.errors import SimulationError
from app.core.utils.logger import get_logger
from app.schemas.catalog_response import ComplexityResponse, CQPointsResponse
from app.services.catalog_service import catalog_service

logger = get_logger(__name__)

router = APIRouter(tags=["catalog"])


@router.get("/cqpoints", response_model=CQPointsResponse)
async def get_cq_points(
    dim: int = Query(..., ge=1, le=64, description="State dimension M"),
    order: int = Query(..., ge=1, le=12, description="Laguerre order n'"),
    root_method: str = Query("bisection", pattern="^(bisection|companion)$"),
):
    """
    CQ point set for a dimension and order.

    Returns the ``2 M n'`` weights and points; the weights sum to one.
    """
    try:
        return catalog_service.cq_points(dim, order, root_method)
    except SimulationError as e:
        logger.warning("CQ point generation failed", {"M": dim, "nprime": order, "error": str(e)})
        raise HTTPException(status_code=400, detail=str(e))


@router.get("/complexity", response_model=ComplexityResponse)
async def get_complexity(
    n: int = Query(..., ge=1, description="Number of sensors N"),
    m: int = Query(..., ge=1, description="State dimension M"),
    c: int = Query(..., ge=1, description="Number of clients C"),
    s: int = Query(..., ge=1, description="Monte Carlo samples S"),
    nprime: int = Query(..., ge=1, description="Laguerre order n'"),
):
    """Per-step operation bounds and asymptotic order of every scheduler."""
    logger.debug("Complexity requested", {"N": n, "M": m, "C": c, "S": s, "nprime": nprime})
    try:
        return catalog_service.complexity(n, m, c, s, nprime)
    except SimulationError as e:
        raise HTTPException(status_code=400, detail=str(e))
