"""Structured logging framework for the RFRBoost toolkit.

Every logger hands out keyword fields alongside the message:

    from src.logging_config import get_logger, log_performance

    logger = get_logger(__name__)
    logger.debug("Gradient round", round=3, risk=0.1234, alpha=0.82)

Text output renders fields as ``key=value`` with floats at six significant
digits; JSON output (``RFRBOOST_LOG_FORMAT=json``) emits one object per
record with numpy scalars and small arrays converted to plain JSON.

Environment:
    RFRBOOST_LOG_LEVEL   DEBUG shows one record per boosting round (default INFO)
    RFRBOOST_LOG_FILE    also append JSON records to this file
    RFRBOOST_LOG_FORMAT  "text" (default) or "json" on stderr
"""

from __future__ import annotations

import functools
import json
import logging
import os
import sys
import time
from collections.abc import Callable
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

UTC = timezone.utc

LOG_LEVEL = os.getenv("RFRBOOST_LOG_LEVEL", "INFO").upper()
LOG_FILE = os.getenv("RFRBOOST_LOG_FILE", "")
LOG_FORMAT = os.getenv("RFRBOOST_LOG_FORMAT", "text")

# arrays longer than this are summarised by shape in log fields
_MAX_LOGGED_ARRAY = 16

_registry: dict[str, RFRBoostLogger] = {}


def _field_value(value: Any) -> Any:
    """Plain-Python view of a structured field."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        if value.size > _MAX_LOGGED_ARRAY:
            return f"array{value.shape}"
        return value.tolist()
    return value


def _render(value: Any) -> str:
    value = _field_value(value)
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


class RFRBoostFormatter(logging.Formatter):
    """Console formatter; colours by level when stderr is a terminal."""

    COLORS = {
        "DEBUG": "\033[36m",
        "INFO": "\033[32m",
        "WARNING": "\033[33m",
        "ERROR": "\033[31m",
        "CRITICAL": "\033[35m",
    }
    RESET = "\033[0m"

    def __init__(self, use_colors: bool = True):
        self.use_colors = use_colors and sys.stderr.isatty()
        super().__init__(fmt="%(asctime)s | %(levelname)-8s | %(name)s | %(message)s", datefmt="%H:%M:%S")

    def format(self, record: logging.LogRecord) -> str:
        fields = getattr(record, "extra_fields", None) or {}
        line = super().format(record)
        if fields:
            line = f"{line} | " + " ".join(f"{k}={_render(v)}" for k, v in fields.items())
        if self.use_colors:
            return f"{self.COLORS.get(record.levelname, '')}{line}{self.RESET}"
        return line


class JSONFormatter(logging.Formatter):
    """One JSON object per record, fields merged at the top level."""

    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, Any] = {
            "timestamp": datetime.now(UTC).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        for key, value in (getattr(record, "extra_fields", None) or {}).items():
            payload[key] = _field_value(value)
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        return json.dumps(payload, default=str)


class RFRBoostLogger(logging.Logger):
    """Logger whose level methods take structured keyword fields."""

    def _emit(self, level: int, msg: str, fields: dict[str, Any]) -> None:
        if self.isEnabledFor(level):
            self._log(level, msg, args=(), extra={"extra_fields": fields})

    def debug(self, msg: str, **fields) -> None:
        self._emit(logging.DEBUG, msg, fields)

    def info(self, msg: str, **fields) -> None:
        self._emit(logging.INFO, msg, fields)

    def warning(self, msg: str, **fields) -> None:
        self._emit(logging.WARNING, msg, fields)

    def error(self, msg: str, **fields) -> None:
        self._emit(logging.ERROR, msg, fields)

    def critical(self, msg: str, **fields) -> None:
        self._emit(logging.CRITICAL, msg, fields)


logging.setLoggerClass(RFRBoostLogger)


def _build_handlers() -> list[logging.Handler]:
    # stderr keeps stdout free for reports
    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(JSONFormatter() if LOG_FORMAT == "json" else RFRBoostFormatter())
    handlers: list[logging.Handler] = [console]
    if LOG_FILE:
        Path(LOG_FILE).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(LOG_FILE)
        file_handler.setFormatter(JSONFormatter())
        handlers.append(file_handler)
    return handlers


def get_logger(name: str) -> RFRBoostLogger:
    """Configured logger for ``name`` (typically ``__name__``).

    Example:
        logger = get_logger(__name__)
        logger.info("Fold scored", fold=2, rmse=0.41)
    """
    if name in _registry:
        return _registry[name]
    logger = logging.getLogger(name)
    if not logger.handlers:
        logger.setLevel(getattr(logging, LOG_LEVEL, logging.INFO))
        for handler in _build_handlers():
            logger.addHandler(handler)
        logger.propagate = False
    _registry[name] = logger  # type: ignore[assignment]
    return logger  # type: ignore[return-value]


def set_log_level(level: str) -> None:
    """Change the level of every logger handed out so far and of later ones."""
    global LOG_LEVEL
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise ValueError(f"Unknown log level '{level}'")
    LOG_LEVEL = level.upper()
    for logger in _registry.values():
        logger.setLevel(numeric)


def log_performance(func: Callable | None = None, *, level: str = "DEBUG") -> Callable:
    """Decorator logging wall-clock time of each call, and failures at ERROR.

    Example:
        @log_performance
        def load_csv(path, schema=None): ...

        @log_performance(level="INFO")
        def save_model(model, path): ...
    """
    def decorator(f: Callable) -> Callable:
        logger = get_logger(f.__module__)

        @functools.wraps(f)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            try:
                result = f(*args, **kwargs)
            except Exception as e:
                logger.error(f"{f.__name__} failed", elapsed_ms=_ms_since(start), error=str(e))
                raise
            getattr(logger, level.lower(), logger.debug)(f"{f.__name__} completed", elapsed_ms=_ms_since(start))
            return result

        return wrapper

    return decorator(func) if func is not None else decorator


def _ms_since(start: float) -> float:
    return round((time.perf_counter() - start) * 1000, 2)


class Timer:
    """Context manager for timing code blocks; ``elapsed`` is in seconds.

    Example:
        with Timer("fold 3", logger) as t:
            model = fit_recipe(recipe, train, seed)
        report["seconds"] = t.elapsed
    """

    def __init__(self, name: str, logger: RFRBoostLogger | None = None, level: str = "DEBUG"):
        self.name = name
        self.logger = logger or get_logger(__name__)
        self.level = level
        self.start = 0.0
        self.elapsed = 0.0

    def __enter__(self) -> Timer:
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self.elapsed = time.perf_counter() - self.start
        elapsed_ms = round(self.elapsed * 1000, 2)
        if exc_type is None:
            getattr(self.logger, self.level.lower(), self.logger.debug)(f"{self.name} completed",
                                                                        elapsed_ms=elapsed_ms)
        else:
            self.logger.error(f"{self.name} failed", elapsed_ms=elapsed_ms, error=str(exc_val))
