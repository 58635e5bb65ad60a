"""Catalog Service

Static, seed-free lookups shared by the CLI and the HTTP routes: the CQ
point set for a dimension/order and the per-step complexity of each
scheduler for a parameter tuple.
"""

from typing import Dict

from app.core.estimation import cqpoints
from app.core.utils.complexity import complexity_table
from app.core.utils.logger import get_logger
from app.schemas.catalog_response import ComplexityResponse, CQPointsResponse

logger = get_logger(__name__)


class CatalogService:

    def cq_points(self, dim: int, order: int, root_method: str = "bisection") -> CQPointsResponse:
        pts = cqpoints.generate(dim, order, root_method)
        logger.debug("CQ points served", {"M": dim, "nprime": order, "points": pts.size})
        return CQPointsResponse(**pts.to_dict())

    def complexity(self, n: int, m: int, c: int, s: int, nprime: int) -> ComplexityResponse:
        params: Dict[str, int] = {"N": n, "M": m, "C": c, "S": s, "nprime": nprime}
        return ComplexityResponse(params=params, schedulers=complexity_table(n, m, c, s, nprime))

    @staticmethod
    def complexity_text(response: ComplexityResponse) -> str:
        """Aligned table row per scheduler."""
        p = response.params
        lines = [f"{{N, M, C, S, n'}} = {{{p['N']}, {p['M']}, {p['C']}, {p['S']}, {p['nprime']}}}"]
        for name, entry in response.schedulers.items():
            lower, upper = entry.bounds
            lines.append(f"  {name:<14} [{lower:>12}, {upper:>12}]   {entry.big_o['upper']}")
        return "\n".join(lines)


# Global instance
catalog_service = CatalogService()
