"""
Health check routes for system monitoring.
"""
import platform
import time
from datetime import datetime, timedelta
from typing import Any, Dict

import numpy as np
import scipy
from fastapi import APIRouter

from app.core.config import settings
from app.core.utils.logger import get_logger

logger = get_logger(__name__)

router = APIRouter(prefix="", tags=["system"])

START_TIME = time.time()


@router.get("", summary="Basic health check")
async def basic_health() -> Dict[str, Any]:
    """
    Basic health check endpoint.

    Returns:
        Status, timestamp, uptime and the numerical stack versions
    """
    logger.debug("Basic health check requested")

    uptime = time.time() - START_TIME
    return {
        "status": "ok",
        "timestamp": datetime.now().isoformat(),
        "uptime": str(timedelta(seconds=int(uptime))),
        "version": settings.API_VERSION,
        "numerics": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }


@router.get("/logs", summary="Logging system health check")
async def logs_health() -> Dict[str, Any]:
    """Current logging configuration."""
    logger.info("Logs health check requested")
    return {
        "status": "ok",
        "timestamp": datetime.now().isoformat(),
        "logging": {
            "level": settings.LOG_LEVEL,
            "file_logging": settings.LOG_TO_FILE,
            "log_dir": settings.LOG_DIR if settings.LOG_TO_FILE else None,
        },
    }
