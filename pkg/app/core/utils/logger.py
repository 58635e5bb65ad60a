import logging
import logging.handlers
import sys
import json
from datetime import datetime
from pathlib import Path
from typing import Optional, Dict, Any, Union
from colorama import init as init_colorama, Fore, Style, Back

# Windows terminals need colorama to translate ANSI codes
init_colorama()


class EnhancedFormatter(logging.Formatter):
    """Console/file formatter: compact coloured lines or detailed plain lines."""

    LEVEL_COLORS = {
        'DEBUG': Fore.CYAN + Style.DIM,
        'INFO': Fore.GREEN,
        'WARNING': Fore.YELLOW + Style.BRIGHT,
        'ERROR': Fore.RED + Style.BRIGHT,
        'CRITICAL': Fore.WHITE + Back.RED + Style.BRIGHT,
    }

    LEVEL_ICONS = {
        'DEBUG': '·',
        'INFO': '›',
        'WARNING': '!',
        'ERROR': '✗',
        'CRITICAL': '‼',
    }

    def __init__(self, use_colors: bool = True, use_icons: bool = True, compact: bool = False):
        self.use_colors = use_colors
        self.use_icons = use_icons
        self.compact = compact
        super().__init__()

    def format(self, record: logging.LogRecord) -> str:
        timestamp = datetime.fromtimestamp(record.created).strftime('%H:%M:%S.%f')[:-3]
        level = record.levelname
        message = record.getMessage()

        level_color = self.LEVEL_COLORS.get(level, '') if self.use_colors else ''
        reset = Style.RESET_ALL if self.use_colors else ''
        icon = f"{self.LEVEL_ICONS.get(level, '')} " if self.use_icons else ''

        if self.compact:
            formatted = f"{level_color}{icon}{timestamp} {level:8} {record.name:28} | {message}{reset}"
        else:
            formatted = f"{timestamp} - {level:8} - {record.name:32} - {message} [{record.filename}:{record.lineno}]"

        if record.exc_info and not self.compact:
            exc_text = self.formatException(record.exc_info)
            if self.use_colors:
                exc_text = f"{Fore.RED}{exc_text}{Style.RESET_ALL}"
            formatted += f"\n{exc_text}"

        return formatted


class StructuredLogger:
    """Logger wrapper that appends a ``key=value`` context to every message."""

    def __init__(self, name: str):
        self.logger = logging.getLogger(name)
        self.name = name

    @property
    def level(self) -> int:
        return self.logger.level

    @level.setter
    def level(self, value: Union[str, int]) -> None:
        if isinstance(value, str):
            value = getattr(logging, value.upper(), logging.INFO)
        self.logger.setLevel(value)

    def is_debug(self) -> bool:
        return self.logger.isEnabledFor(logging.DEBUG)

    def _format_context(self, context: Optional[Dict[str, Any]]) -> str:
        if not context:
            return ""

        formatted_items = []
        for key, value in context.items():
            if isinstance(value, float):
                value = f"{value:.6g}"
            elif isinstance(value, str) and len(value) > 60:
                value = value[:57] + "..."
            elif isinstance(value, (dict, list, tuple)):
                rendered = json.dumps(value, default=str)
                value = rendered[:60] + "..." if len(rendered) > 60 else rendered
            formatted_items.append(f"{key}={value}")

        return " | ".join(formatted_items)

    def debug(self, message: str, context: Optional[Dict[str, Any]] = None, **kwargs):
        self._log(logging.DEBUG, message, context, **kwargs)

    def info(self, message: str, context: Optional[Dict[str, Any]] = None, **kwargs):
        self._log(logging.INFO, message, context, **kwargs)

    def warning(self, message: str, context: Optional[Dict[str, Any]] = None, **kwargs):
        self._log(logging.WARNING, message, context, **kwargs)

    def error(self, message: str, context: Optional[Dict[str, Any]] = None, **kwargs):
        self._log(logging.ERROR, message, context, **kwargs)

    def critical(self, message: str, context: Optional[Dict[str, Any]] = None, **kwargs):
        self._log(logging.CRITICAL, message, context, **kwargs)

    def success(self, message: str, context: Optional[Dict[str, Any]] = None, **kwargs):
        """Info-level line tagged ``status=success``."""
        context = dict(context or {})
        context['status'] = 'success'
        self._log(logging.INFO, f"✓ {message}", context, **kwargs)

    def failure(self, message: str, context: Optional[Dict[str, Any]] = None, **kwargs):
        """Error-level line tagged ``status=failure``."""
        context = dict(context or {})
        context['status'] = 'failure'
        self._log(logging.ERROR, f"✗ {message}", context, **kwargs)

    def performance(self, message: str, duration: float, context: Optional[Dict[str, Any]] = None, **kwargs):
        """Info-level line carrying ``duration_ms``."""
        context = dict(context or {})
        context['duration_ms'] = round(duration * 1000, 2)
        self._log(logging.INFO, message, context, **kwargs)

    def progress(self, t: int, horizon: int, context: Optional[Dict[str, Any]] = None, **kwargs):
        """Periodic run-loop progress line."""
        context = dict(context or {})
        context['t'] = t
        context['pct'] = round(100.0 * t / max(horizon, 1), 1)
        self._log(logging.INFO, "Simulation progress", context, **kwargs)

    def http_request(self, method: str, path: str, status_code: int, duration: float, **kwargs):
        """Request/response line for the HTTP middleware; level follows the status class."""
        context = {
            'method': method,
            'path': path,
            'status_code': status_code,
            'duration_ms': round(duration * 1000, 2),
        }
        if status_code >= 500:
            level = logging.ERROR
        elif status_code >= 400:
            level = logging.WARNING
        else:
            level = logging.INFO
        self._log(level, f"{method} {path} → {status_code}", context, **kwargs)

    def _log(self, level: int, message: str, context: Optional[Dict[str, Any]] = None, **kwargs):
        if context:
            context_str = self._format_context(context)
            if context_str:
                message = f"{message} | {context_str}"
        self.logger.log(level, message, **kwargs)


def setup_logging(level: Union[str, int] = logging.INFO,
                  enable_file_logging: bool = False,
                  log_dir: Union[str, Path] = "logs",
                  enable_colors: bool = True,
                  enable_icons: bool = True) -> StructuredLogger:
    """Configure the root logger for the CLI or the API server."""
    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.INFO)

    root_logger = logging.getLogger()
    root_logger.setLevel(level)

    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    # stderr keeps stdout free for JSON emitted by the CLI
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(EnhancedFormatter(
        use_colors=enable_colors,
        use_icons=enable_icons,
        compact=True
    ))
    root_logger.addHandler(console_handler)

    if enable_file_logging:
        log_path = Path(log_dir)
        log_path.mkdir(parents=True, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            filename=log_path / "simulation.log",
            maxBytes=10 * 1024 * 1024,
            backupCount=5,
            encoding="utf-8"
        )
        file_handler.setLevel(level)
        file_handler.setFormatter(EnhancedFormatter(use_colors=False, use_icons=False, compact=False))
        root_logger.addHandler(file_handler)

    for noisy in ('uvicorn', 'uvicorn.error', 'fastapi', 'httpx', 'joblib'):
        logging.getLogger(noisy).setLevel(logging.WARNING)
    logging.getLogger('uvicorn.access').disabled = True

    app_logger = logging.getLogger('app')
    app_logger.setLevel(level)
    app_logger.propagate = True

    logger = get_logger(__name__)
    logger.debug("Logging initialized", {
        "log_level": logging.getLevelName(level),
        "file_logging": enable_file_logging,
        "colors": enable_colors,
    })
    return logger


def get_logger(name: str) -> StructuredLogger:
    """Get a structured logger for ``name``."""
    return StructuredLogger(name)
