import os
import sys
from pathlib import Path

import pytest

root_dir = Path(__file__).parent.parent
sys.path.insert(0, str(root_dir))

os.environ.setdefault("LOG_LEVEL", "WARNING")

from app.core.utils.numerics import RngStream  # noqa: E402
from app.schemas.experiment_config import ExperimentConfig  # noqa: E402


@pytest.fixture
def rng():
    return RngStream(seed=1234, stream_id=0)


@pytest.fixture
def small_config_dict():
    """Four-dimensional world, short horizon: fast enough for end-to-end runs."""
    return {
        "world": {"M": 4, "N": 4},
        "horizon": 40,
        "warmup": 10,
        "S": 20,
        "seed": 3,
    }


@pytest.fixture
def small_config(small_config_dict):
    return ExperimentConfig.model_validate(small_config_dict)

