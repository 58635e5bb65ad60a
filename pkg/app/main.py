"""Main application module for the scheduler lab API.

This module initializes the FastAPI application, sets up logging,
registers routers, middleware, and exception handlers.
"""

import time
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request, status
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app.core.config import settings
from app.core.errors import ConfigError, SimulationError
from app.core.utils.logger import get_logger, setup_logging
from app.routes.catalog import router as catalog_router
from app.routes.experiments import router as experiments_router
from app.routes.health import router as health_router

setup_logging(settings.LOG_LEVEL, settings.LOG_TO_FILE, settings.LOG_DIR)
logger = get_logger(__name__)

API_PREFIX = "/api/v1"

tags_metadata = [
    {"name": "experiments", "description": "Run short seeded experiments and get their summary."},
    {"name": "catalog", "description": "CQ point sets and per-step scheduler complexity."},
    {"name": "system", "description": "System health monitoring."},
    {"name": "root", "description": "API information and documentation."},
]


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Log startup and shutdown of the service."""
    logger.info("Starting scheduler lab API", {"version": settings.API_VERSION, "log_level": settings.LOG_LEVEL})
    try:
        yield
    finally:
        logger.info("Shutting down scheduler lab API")


async def validation_exception_handler(request: Request, exc: RequestValidationError):
    logger.error("Request validation error", {
        "path": str(request.url.path),
        "method": request.method,
        "errors": str(exc.errors()),
    })
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={"detail": exc.errors()},
    )


async def config_exception_handler(request: Request, exc: ConfigError):
    logger.warning("Invalid experiment config", {"path": str(request.url.path), "error": str(exc)})
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={"detail": str(exc), "field": exc.field},
    )


async def simulation_exception_handler(request: Request, exc: SimulationError):
    logger.failure("Simulation failed", {"path": str(request.url.path), "error": str(exc)})
    return JSONResponse(
        status_code=status.HTTP_400_BAD_REQUEST,
        content={"detail": str(exc), "type": type(exc).__name__},
    )


async def global_exception_handler(request: Request, exc: Exception):
    """Handle all unhandled exceptions.

    Args:
        request: The incoming request
        exc: The unhandled exception

    Returns:
        JSONResponse with a generic error message
    """
    logger.error("Unhandled exception", {
        "path": str(request.url.path),
        "method": request.method,
        "error": str(exc),
    }, exc_info=exc)
    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content={"detail": "Internal server error"},
    )


async def log_requests(request: Request, call_next):
    """Log every request with its status and duration."""
    start_time = time.time()
    try:
        response = await call_next(request)
    except Exception as e:
        logger.failure("Request processing failed", {
            "method": request.method,
            "path": request.url.path,
            "error": str(e),
            "duration_ms": round((time.time() - start_time) * 1000, 2),
        }, exc_info=True)
        raise
    logger.http_request(request.method, request.url.path, response.status_code, time.time() - start_time)
    return response


def register_routers(app: FastAPI) -> None:
    """Register all API routers.

    Args:
        app: FastAPI application instance
    """
    app.include_router(experiments_router, prefix=f"{API_PREFIX}/experiments")
    app.include_router(catalog_router, prefix=API_PREFIX)
    app.include_router(health_router, prefix=f"{API_PREFIX}/health")

    @app.get("/", tags=["root"])
    async def root():
        """API information and links."""
        return {
            "name": settings.API_TITLE,
            "version": settings.API_VERSION,
            "status": "operational",
            "description": settings.API_DESCRIPTION,
            "documentation": {"swagger": "/docs", "redoc": "/redoc"},
            "endpoints": [
                f"POST {API_PREFIX}/experiments",
                f"GET {API_PREFIX}/cqpoints",
                f"GET {API_PREFIX}/complexity",
                f"GET {API_PREFIX}/health",
            ],
        }


def create_application() -> FastAPI:
    """Create and configure the FastAPI application.

    Returns:
        FastAPI: Configured FastAPI application instance
    """
    app = FastAPI(
        title=settings.API_TITLE,
        description=settings.API_DESCRIPTION,
        version=settings.API_VERSION,
        openapi_tags=tags_metadata,
        docs_url="/docs",
        redoc_url="/redoc",
        lifespan=lifespan,
    )

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_credentials=True,
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.middleware("http")(log_requests)

    app.add_exception_handler(RequestValidationError, validation_exception_handler)
    app.add_exception_handler(ConfigError, config_exception_handler)
    app.add_exception_handler(SimulationError, simulation_exception_handler)
    app.add_exception_handler(Exception, global_exception_handler)

    register_routers(app)
    return app


app = create_application()
