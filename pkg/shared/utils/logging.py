"""
Structured logging setup shared by the library and the CLI.
"""

import logging
import sys
from typing import Any

import structlog

_LEVELS = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
}


def configure_logging(
    level: str = "INFO", fmt: str = "console", quiet: bool = False
) -> None:
    """
    Configure structlog for the process.

    Args:
        level: Minimum level name
        fmt: "console" for key=value lines, "json" for one JSON object per line
        quiet: Raise the level to WARNING regardless of ``level``
    """
    numeric_level = _LEVELS.get(level.upper(), logging.INFO)
    if quiet:
        numeric_level = max(numeric_level, logging.WARNING)

    renderer: Any
    if fmt == "json":
        renderer = structlog.processors.JSONRenderer()
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=False)

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric_level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


def get_logger(name: str) -> Any:
    """Return a bound structlog logger tagged with the module name."""
    return structlog.get_logger(name).bind(module=name)
