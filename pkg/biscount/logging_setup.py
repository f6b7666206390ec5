"""Structured logging for the package.

Records are emitted as JSON lines through python-json-logger. Library code only
ever calls `get_logger`; the CLI and the API decide where records go.
"""

from __future__ import annotations

import logging
import os
import sys
from typing import Optional

try:
    from pythonjsonlogger.json import JsonFormatter
except ImportError:  # python-json-logger < 3
    from pythonjsonlogger.jsonlogger import JsonFormatter  # type: ignore

ROOT_LOGGER = "biscount"

_JSON_FIELDS = "%(asctime)s %(levelname)s %(name)s %(message)s"
_TEXT_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


def get_logger(name: str) -> logging.Logger:
    if name == ROOT_LOGGER or name.startswith(ROOT_LOGGER + "."):
        return logging.getLogger(name)
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")


def configure_logging(level: Optional[str] = None, json_format: bool = True) -> logging.Logger:
    """Install a single stderr handler on the package logger. Idempotent."""
    level_name = (level or os.getenv("BISCOUNT_LOG_LEVEL", "WARNING")).upper()
    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(level_name)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    if json_format:
        handler.setFormatter(JsonFormatter(_JSON_FIELDS))
    else:
        handler.setFormatter(logging.Formatter(_TEXT_FORMAT))
    logger.addHandler(handler)
    logger.propagate = False
    return logger


__all__ = ["get_logger", "configure_logging", "ROOT_LOGGER"]
