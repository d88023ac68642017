"""
Switching, projection and gain-adaptation primitives of the controllers.
"""

import numpy as np

from shared.exceptions import NumericError, ValidationError
from shared.numerics import SymMatrix, solve_spd

from .models import GainAdaptation


def heaviside(x: float) -> float:
    """½(1 + sign x); the switch is half open on the boundary."""
    if not np.isfinite(x):
        raise ValidationError("heaviside argument must be finite", details={"x": x})
    return 0.5 * (1.0 + float(np.sign(x)))


def projector(e: np.ndarray, eps_reg: float) -> SymMatrix:
    """
    Regularized projector eeᵀ/(ε + ‖e‖²) onto span(e).

    Raises:
        NumericError: If ε = 0 and e = 0
    """
    e = np.asarray(e, dtype=float)
    if eps_reg < 0.0:
        raise ValidationError(
            "eps_reg must be non-negative", details={"eps_reg": eps_reg}
        )
    denominator = eps_reg + float(e @ e)
    if denominator == 0.0:
        raise NumericError("projector onto the zero vector is undefined")
    return SymMatrix(np.outer(e, e) / denominator)


def _psd(sigma: SymMatrix | np.ndarray) -> np.ndarray:
    if isinstance(sigma, SymMatrix):
        matrix = sigma.entries
    else:
        matrix = np.asarray(sigma, dtype=float)
    matrix = 0.5 * (matrix + matrix.T)
    eigenvalues, vectors = np.linalg.eigh(matrix)
    if eigenvalues[0] >= 0.0:
        return matrix
    return (vectors * np.maximum(eigenvalues, 0.0)) @ vectors.T


def _inner(g: GainAdaptation, sigma: np.ndarray) -> np.ndarray:
    # K̃ = K₃(K₂+Σ)K₃ + K₁
    return g.k3 @ (g.k2 + sigma) @ g.k3 + g.k1


def adaptive_gain(g: GainAdaptation, sigma: SymMatrix | np.ndarray) -> np.ndarray:
    """
    Variance-dependent gain K₁(I − K̃⁻¹K₁), K̃ = K₃(K₂+Σ)K₃ + K₁.

    The gain grows with Σ from its floor towards K₁. Indefinite Σ is
    clamped to its PSD part first.
    """
    sigma = _psd(sigma)
    if sigma.shape != g.k1.shape:
        raise ValidationError(
            f"covariance is {sigma.shape}, gains are {g.k1.shape}"
        )
    gain = g.k1 - g.k1 @ solve_spd(_inner(g, sigma), g.k1)
    return 0.5 * (gain + gain.T)


def gain_derivative(
    g: GainAdaptation, sigma: SymMatrix | np.ndarray, sigma_rate: np.ndarray
) -> np.ndarray:
    """K̇ = K₁K̃⁻¹K₃Σ̇K₃K̃⁻¹K₁ along a covariance path Σ(t)."""
    sigma = _psd(sigma)
    sigma_rate = np.asarray(sigma_rate, dtype=float)
    sigma_rate = 0.5 * (sigma_rate + sigma_rate.T)
    right = solve_spd(_inner(g, sigma), g.k1)
    rate = right.T @ g.k3 @ sigma_rate @ g.k3 @ right
    return 0.5 * (rate + rate.T)


def design_k3(k1: float, k2: float, k_floor: float) -> float:
    """
    Scalar K₃ placing the Σ = 0 gain at ``k_floor``.

    Raises:
        ValidationError: Unless 0 < k_floor < k1 and k2 > 0
    """
    if k2 <= 0.0 or not 0.0 < k_floor < k1:
        raise ValidationError(
            "gain floor must lie in (0, k1) with k2 > 0",
            details={"k1": k1, "k2": k2, "k_floor": k_floor},
        )
    return float(1.0 / np.sqrt(k2 * (1.0 / k_floor - 1.0 / k1)))
