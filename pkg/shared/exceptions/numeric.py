"""
Numerical failure exceptions: factorizations, divergence and certificates.
"""

from typing import Any, Dict, List, Optional

from .base import LgpControlException


class NumericError(LgpControlException):
    """Base class for numerical failures (CLI exit status 2)."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, exit_code=2, details=details)


class DecompositionError(NumericError):
    """Raised when a Cholesky factorization fails after the jitter ladder."""

    def __init__(self, pivot: int, jitter: float = 0.0, dim: Optional[int] = None):
        message = f"matrix not positive definite at pivot {pivot}"
        if jitter > 0.0:
            message += f" (after jitter {jitter:.3e})"
        super().__init__(message)
        self.pivot = pivot
        self.jitter = jitter
        self.details = {"pivot": pivot, "jitter": jitter, "dim": dim}


class DivergenceError(NumericError):
    """Raised when a simulated state leaves the finite domain."""

    def __init__(self, time: float, reason: str):
        super().__init__(f"state diverged at t={time:.6g}s: {reason}")
        self.time = time
        self.reason = reason
        self.details = {"time": time, "reason": reason}


class InfeasibilityError(LgpControlException):
    """Raised when certificate parameters violate the stability conditions."""

    def __init__(self, message: str, violations: Optional[List[str]] = None):
        super().__init__(message, exit_code=3)
        self.violations = list(violations or [])
        self.details = {"violations": self.violations}


class CertificateVoidError(NumericError):
    """Raised when a certificate quantity is undefined, e.g. a non-positive floor."""

    def __init__(self, reason: str):
        super().__init__(f"certificate void: {reason}")
        self.details = {"reason": reason}
