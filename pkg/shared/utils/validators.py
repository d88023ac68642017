"""
Data validation utilities for lgp-control.
"""

from typing import Any, List, Optional

import numpy as np

from shared.exceptions.base import ValidationError


class Validators:
    """Collection of validation utilities for scalars and arrays."""

    @staticmethod
    def validate_finite(value: Any, field_name: str) -> np.ndarray:
        """
        Validate that every entry is a finite real number.

        Args:
            value: Scalar or array-like to validate
            field_name: Name of the field (for error message)

        Returns:
            np.ndarray: Validated value as a float array

        Raises:
            ValidationError: If any entry is NaN or infinite
        """
        array = np.asarray(value, dtype=float)
        if not np.all(np.isfinite(array)):
            raise ValidationError(
                f"{field_name} must have finite entries",
                details={"field": field_name},
            )
        return array

    @staticmethod
    def validate_vector(
        value: Any, field_name: str, dim: Optional[int] = None
    ) -> np.ndarray:
        """
        Validate a finite one-dimensional vector.

        Args:
            value: Array-like to validate
            field_name: Name of the field (for error message)
            dim: Required length, if any

        Returns:
            np.ndarray: Validated vector

        Raises:
            ValidationError: If shape or entries are invalid
        """
        vector = Validators.validate_finite(value, field_name)
        if vector.ndim != 1:
            raise ValidationError(f"{field_name} must be a vector, got {vector.shape}")
        if dim is not None and vector.shape[0] != dim:
            raise ValidationError(
                f"{field_name} must have dimension {dim}, got {vector.shape[0]}"
            )
        return vector

    @staticmethod
    def validate_square(
        value: Any, field_name: str, dim: Optional[int] = None
    ) -> np.ndarray:
        """
        Validate a finite square matrix.

        Args:
            value: Array-like to validate
            field_name: Name of the field (for error message)
            dim: Required dimension, if any

        Returns:
            np.ndarray: Validated matrix

        Raises:
            ValidationError: If the matrix is not square or has the wrong size
        """
        matrix = Validators.validate_finite(value, field_name)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValidationError(
                f"{field_name} must be a square matrix, got {matrix.shape}"
            )
        if dim is not None and matrix.shape[0] != dim:
            raise ValidationError(
                f"{field_name} must be {dim}x{dim}, got {matrix.shape}"
            )
        return matrix

    @staticmethod
    def validate_symmetric(
        value: Any, field_name: str, rtol: float = 1e-9
    ) -> np.ndarray:
        """
        Validate a finite symmetric matrix (up to a relative tolerance).

        Raises:
            ValidationError: If the matrix is not symmetric
        """
        matrix = Validators.validate_square(value, field_name)
        scale = max(1.0, float(np.max(np.abs(matrix)))) if matrix.size else 1.0
        if np.max(np.abs(matrix - matrix.T), initial=0.0) > rtol * scale:
            raise ValidationError(f"{field_name} must be symmetric")
        return matrix

    @staticmethod
    def validate_range(
        value: float | int,
        field_name: str,
        min_value: Optional[float | int] = None,
        max_value: Optional[float | int] = None,
    ) -> float | int:
        """
        Validate numeric range.

        Args:
            value: Number to validate
            field_name: Name of the field (for error message)
            min_value: Minimum value
            max_value: Maximum value

        Returns:
            float | int: Validated number

        Raises:
            ValidationError: If number is out of range
        """
        if value is None:
            raise ValidationError(f"{field_name} is required")

        if min_value is not None and value < min_value:
            raise ValidationError(f"{field_name} must be at least {min_value}")

        if max_value is not None and value > max_value:
            raise ValidationError(f"{field_name} must be at most {max_value}")

        return value

    @staticmethod
    def validate_positive(value: float, field_name: str) -> float:
        """Validate a strictly positive finite scalar."""
        if value is None or not np.isfinite(value) or value <= 0.0:
            raise ValidationError(f"{field_name} must be positive, got {value}")
        return float(value)

    @staticmethod
    def validate_enum(value: Any, field_name: str, allowed_values: List[Any]) -> Any:
        """
        Validate value is in allowed list.

        Args:
            value: Value to validate
            field_name: Name of the field (for error message)
            allowed_values: List of allowed values

        Returns:
            Any: Validated value

        Raises:
            ValidationError: If value not in allowed list
        """
        if value not in allowed_values:
            raise ValidationError(
                f"Invalid {field_name}. "
                f"Allowed values: {', '.join(map(str, allowed_values))}"
            )

        return value


# Global validator instance
validators = Validators()
