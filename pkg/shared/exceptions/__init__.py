"""
Exception classes for lgp-control.
"""

from .base import (
    ConfigurationError,
    LgpControlException,
    NotFoundError,
    StorageError,
    ValidationError,
)
from .numeric import (
    CertificateVoidError,
    DecompositionError,
    DivergenceError,
    InfeasibilityError,
    NumericError,
)

__all__ = [
    # Base exceptions
    "LgpControlException",
    "ValidationError",
    "NotFoundError",
    "StorageError",
    "ConfigurationError",
    # Numerical exceptions
    "NumericError",
    "DecompositionError",
    "DivergenceError",
    "InfeasibilityError",
    "CertificateVoidError",
]
