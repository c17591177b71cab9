"""Shared rich console and logging setup."""

import logging
import os
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

console = Console()

_configured = False


def configure_logging(level: Optional[str] = None) -> None:
    """Route the package loggers through a RichHandler.

    Args:
        level: Log level name; defaults to ``LIQUAR_LOG_LEVEL`` or INFO
    """
    global _configured
    level = (level or os.getenv("LIQUAR_LOG_LEVEL", "INFO")).upper()

    root = logging.getLogger("src")
    root.setLevel(level)
    if not _configured:
        handler = RichHandler(console=console, show_path=False, rich_tracebacks=True)
        handler.setFormatter(logging.Formatter("%(message)s"))
        root.addHandler(handler)
        root.propagate = False
        _configured = True


def get_logger(name: str) -> logging.Logger:
    """Return a module logger under the package namespace."""
    return logging.getLogger(name)
