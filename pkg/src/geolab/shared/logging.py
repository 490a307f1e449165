"""Structured logging for solvers, studies and the CLI.

Messages put field-value pairs first and the human text after a pipe:

    logger.info("epsilon=<%s>, step=<%d> | advancing scaled navier-stokes", eps, step)

Use %s interpolation, lowercase text and no trailing punctuation. Records go
to stdout; the level comes from GEOLAB_LOG_LEVEL, then LOG_LEVEL, then INFO.
"""

import logging
import os
import sys

LOG_FORMAT = "[%(levelname)s] %(name)s | %(message)s"

_configured: set[str] = set()


def resolve_level(name: str | None) -> int:
    """Numeric level for a level name; unknown names map to INFO."""
    level = getattr(logging, (name or "INFO").upper(), None)
    return level if isinstance(level, int) else logging.INFO


def _level_from_env() -> int:
    return resolve_level(os.environ.get("GEOLAB_LOG_LEVEL") or os.environ.get("LOG_LEVEL"))


def _stdout_handler(level: int) -> logging.Handler:
    handler = logging.StreamHandler(sys.stdout)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    return handler


def get_logger(name: str) -> logging.Logger:
    """Logger with a single stdout handler, configured on first use.

    Args:
        name: Logger name (typically __name__)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    if not logger.handlers:
        level = _level_from_env()
        logger.setLevel(level)
        logger.addHandler(_stdout_handler(level))
        logger.propagate = False
        _configured.add(name)
    return logger


def set_log_level(name: str) -> int:
    """Retune every logger handed out by get_logger, e.g. from a CLI flag.

    Returns:
        The numeric level applied
    """
    level = resolve_level(name)
    for logger_name in _configured:
        logger = logging.getLogger(logger_name)
        logger.setLevel(level)
        for handler in logger.handlers:
            handler.setLevel(level)
    return level
