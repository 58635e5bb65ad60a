"""Process Settings

Environment-level configuration for the simulator: logging, output location,
parallelism and the HTTP server. Experiment parameters live in the JSON
experiment config (``app.schemas.experiment_config``), not here.
"""

from typing import List

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv

load_dotenv()

VALID_LOG_LEVELS: List[str] = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


class Settings(BaseSettings):
    """Settings loaded from environment variables and an optional ``.env`` file."""

    # API
    API_TITLE: str = "GoS Scheduler Lab API"
    API_DESCRIPTION: str = "Goal-oriented sensor scheduling simulator: CQKF estimation, DRL and Monte Carlo polling"
    API_VERSION: str = "1.0.0"
    API_HOST: str = Field(default="0.0.0.0", description="API host address")
    API_PORT: int = Field(default=3000, description="API port")
    API_MAX_HORIZON: int = Field(default=600, ge=2, description="Largest horizon T accepted by POST /experiments")

    # Logging
    LOG_LEVEL: str = Field(default="INFO", description="Logging level")
    LOG_TO_FILE: bool = Field(default=False, description="Also write a rotating log file")
    LOG_DIR: str = Field(default="logs", description="Directory for the rotating log file")

    # Runs
    OUTPUT_DIR: str = Field(default="results", description="Default output directory for CLI runs")
    N_JOBS: int = Field(default=1, description="Parallel replications (-1 uses every core)")
    PROGRESS_EVERY: int = Field(default=500, ge=1, description="Steps between progress log lines")

    @field_validator('LOG_LEVEL')
    @classmethod
    def validate_log_level(cls, value: str) -> str:
        value = value.upper()
        if value not in VALID_LOG_LEVELS:
            raise ValueError(f"Invalid log level. Must be one of: {VALID_LOG_LEVELS}")
        return value

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
        validate_assignment=True,
    )


settings = Settings()

__all__ = ["settings", "Settings", "VALID_LOG_LEVELS"]
