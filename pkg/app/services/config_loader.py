"""Config Loader Service

Reads an experiment config (JSON), applies command-line overrides and
validates it into an ``ExperimentConfig``. Every failure surfaces as a
``ConfigError`` carrying the offending line and/or dotted field path.
"""

import json
import re
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import ValidationError

from app.core.errors import ConfigError
from app.core.utils.logger import get_logger
from app.schemas.experiment_config import ExperimentConfig

logger = get_logger(__name__)

# override name -> path inside the config document
OVERRIDE_PATHS = {
    "scheduler": ("scheduler", "kind"),
    "preset": ("preset",),
    "mu": ("mu",),
    "nlsd": ("world", "nlsd"),
    "horizon": ("horizon",),
    "warmup": ("warmup",),
    "seed": ("seed",),
    "output_dir": ("output_dir",),
}


class ConfigLoader:
    """Parses and validates experiment configs."""

    def load(self, path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        logger.debug("Loading experiment config", {"path": str(path)})
        return self.load_text(path.read_text(encoding="utf-8"), overrides)

    def load_text(self, text: str, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
        if not text.strip():
            raw: Dict[str, Any] = {}
        else:
            try:
                raw = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"parse error: {exc.msg} (column {exc.colno})", line=exc.lineno) from exc
        if not isinstance(raw, dict):
            raise ConfigError("the config document must be a JSON object", line=1)

        return self.validate(raw, overrides, text=text)

    def validate(self, raw: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None,
                 text: str = "") -> ExperimentConfig:
        raw = self.apply_overrides(raw, overrides or {})
        try:
            cfg = ExperimentConfig.model_validate(raw)
        except ValidationError as exc:
            first = exc.errors()[0]
            field = ".".join(str(part) for part in first["loc"]) or None
            line = self._locate(text, first["loc"])
            raise ConfigError(first["msg"], field=field, line=line) from exc

        logger.debug("Experiment config validated", {
            "scheduler": cfg.scheduler.kind.value,
            "clients": cfg.n_clients,
            "horizon": cfg.horizon,
        })
        return cfg

    @staticmethod
    def apply_overrides(raw: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
        """Copy of ``raw`` with every non-None override written at its config path."""
        merged = json.loads(json.dumps(raw))
        for name, value in overrides.items():
            if value is None:
                continue
            if name not in OVERRIDE_PATHS:
                raise ConfigError(f"unknown override '{name}'", field=name)
            *parents, leaf = OVERRIDE_PATHS[name]
            node = merged
            for key in parents:
                node = node.setdefault(key, {})
            node[leaf] = value
            if name == "preset":
                merged.pop("clients", None)
        return merged

    @staticmethod
    def _locate(text: str, loc) -> Optional[int]:
        """1-based line of the last named key of ``loc`` in ``text``, if present."""
        keys = [part for part in loc if isinstance(part, str)]
        if not text or not keys:
            return None
        pattern = re.compile(r'"%s"\s*:' % re.escape(keys[-1]))
        for number, line in enumerate(text.splitlines(), start=1):
            if pattern.search(line):
                return number
        return None


# Global instance
config_loader = ConfigLoader()


def load_config(path: Union[str, Path], **overrides: Any) -> ExperimentConfig:
    return config_loader.load(path, overrides)
