"""Experiment Routes

Runs one short experiment synchronously and returns its summary. Long runs
belong on the command line; the horizon is capped by ``API_MAX_HORIZON``.
"""

import time
from typing import Any, Dict, Optional

from fastapi import APIRouter, Body, HTTPException, Query

from app.core.config import settings
from app.core.utils.logger import get_logger
from app.schemas.run_models import RunSummary
from app.services.config_loader import config_loader
from app.services.experiment_service import experiment_service

logger = get_logger(__name__)

router = APIRouter(tags=["experiments"])


@router.post("", response_model=RunSummary)
def run_experiment(
    config: Optional[Dict[str, Any]] = Body(None, description="Experiment config, same layout as the CLI JSON"),
    seed: Optional[int] = Query(None, description="Master seed override"),
):
    """
    Run one experiment and return its summary.

    Invalid configs are answered with 422 and failures inside the
    simulation with 400 by the application's exception handlers.
    """
    cfg = config_loader.validate(config or {}, {"seed": seed})
    if cfg.horizon > settings.API_MAX_HORIZON:
        raise HTTPException(
            status_code=413,
            detail=f"horizon {cfg.horizon} exceeds the API limit of {settings.API_MAX_HORIZON}; use the CLI",
        )

    start_time = time.time()
    result = experiment_service.run_experiment(cfg)
    logger.success("Experiment served", {
        "scheduler": result.summary.scheduler,
        "seed": result.summary.seed,
        "horizon": cfg.horizon,
        "duration_ms": round((time.time() - start_time) * 1000, 2),
    })
    return result.summary
