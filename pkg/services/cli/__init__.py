"""
Command-line interface of lgp-control.
"""

from .main import build_parser, dispatch, main, resolve_controller

__all__ = ["build_parser", "dispatch", "main", "resolve_controller"]
