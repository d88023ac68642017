"""
Base exception classes for lgp-control.
All custom exceptions should inherit from these base classes.
"""

from typing import Any, Dict, Optional


class LgpControlException(Exception):
    """Base exception for all lgp-control errors."""

    def __init__(
        self,
        message: str,
        exit_code: int = 2,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        """
        Initialize base exception.

        Args:
            message: Human-readable error message
            exit_code: Process exit status the CLI reports for this error
            error_code: Machine-readable error code
            details: Additional error details
        """
        self.message = message
        self.exit_code = exit_code
        self.error_code = error_code or self.__class__.__name__
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to dictionary for logs and run metadata."""
        return {
            "error": self.error_code,
            "message": self.message,
            "details": self.details,
        }

    def __str__(self) -> str:
        return f"{self.error_code}: {self.message}"


class ValidationError(LgpControlException):
    """Raised when input data is malformed, mis-shaped or non-finite."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, exit_code=1, details=details)


class NotFoundError(LgpControlException):
    """Raised when a requested artifact or roster entry does not exist."""

    def __init__(self, resource: str, identifier: Any):
        message = f"{resource} with identifier '{identifier}' not found"
        super().__init__(message, exit_code=1)
        self.details = {"resource": resource, "identifier": str(identifier)}


class StorageError(LgpControlException):
    """Raised when reading or writing an artifact fails."""

    def __init__(
        self, path: Any, message: str, original_error: Optional[Exception] = None
    ):
        super().__init__(f"{path}: {message}", exit_code=1)
        self.details = {"path": str(path)}
        if original_error:
            self.details["original_error"] = str(original_error)


class ConfigurationError(LgpControlException):
    """Raised when configuration is invalid or missing."""

    def __init__(self, parameter: str, message: str):
        super().__init__(
            f"Configuration error for '{parameter}': {message}", exit_code=1
        )
        self.details = {"parameter": parameter}
