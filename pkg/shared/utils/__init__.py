"""
Utility functions for lgp-control.
"""

from .logging import configure_logging, get_logger
from .validators import Validators, validators

__all__ = [
    "configure_logging",
    "get_logger",
    "Validators",
    "validators",
]
