"""
Shared module for lgp-control.
Contains the cross-cutting components used by every service package.
"""

__version__ = "0.1.0"
