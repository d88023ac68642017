"""
Closed-form spectra of the block matrices used by the stability certificates.

Both block families have commuting sub-blocks that are polynomials in M̂,
so every eigenvalue m of M̂ contributes one 2x2 problem.
"""

import numpy as np

from shared.exceptions import ValidationError
from shared.utils.validators import validators


def _eigs(mhat_eigs) -> np.ndarray:
    values = np.atleast_1d(validators.validate_finite(mhat_eigs, "mhat_eigs"))
    if np.any(values <= 0.0):
        raise ValidationError("mhat_eigs must be positive")
    return values


def metric_pair(kappa: float, m: np.ndarray | float, eps: float):
    """Lower and upper metric eigenvalue branches for inertia eigenvalue(s) m."""
    m = np.asarray(m, dtype=float)
    root = np.sqrt((kappa - m) ** 2 + (2.0 * eps * m) ** 2)
    return 0.5 * (kappa + m - root), 0.5 * (kappa + m + root)


def metric_eigs_closed(kappa: float, mhat_eigs, eps: float) -> np.ndarray:
    """
    Spectrum of [[κI, εM̂], [εM̂, M̂]] from the eigenvalues of M̂.

    Returns:
        np.ndarray: 2·len(mhat_eigs) eigenvalues in ascending order
    """
    validators.validate_positive(kappa, "kappa")
    lower, upper = metric_pair(kappa, _eigs(mhat_eigs), eps)
    return np.sort(np.concatenate([lower, upper]), kind="stable")


def metric_positive(kappa: float, mhat_max: float, eps: float) -> bool:
    """Positivity of the metric: |ε| < √(κ/m̄̂)."""
    return abs(eps) < np.sqrt(kappa / mhat_max)


def upsilon_pair(a, b, gamma, eps, alpha, m):
    """Lower and upper branch λ±(Υ) for inertia eigenvalue(s) m."""
    m = np.asarray(m, dtype=float)
    centre = 0.5 * (a + gamma - (eps + alpha) * m)
    root = np.sqrt(
        (0.5 * (gamma - a - (eps + alpha) * m)) ** 2 + (eps * alpha * m - 0.5 * b) ** 2
    )
    return centre - root, centre + root


def upsilon_eigs_closed(
    a: float, b: float, gamma: float, eps: float, alpha: float, mhat_eigs
) -> np.ndarray:
    """
    Spectrum of Υ(α) = [[aI, (b/2)I − εαM̂], [·, γI − (ε+α)M̂]].

    Returns:
        np.ndarray: 2·len(mhat_eigs) eigenvalues in ascending order
    """
    validators.validate_positive(eps, "eps")
    validators.validate_range(alpha, "alpha", min_value=0.0)
    lower, upper = upsilon_pair(a, b, gamma, eps, alpha, _eigs(mhat_eigs))
    return np.sort(np.concatenate([lower, upper]), kind="stable")


def assemble_metric(
    kappa_block: np.ndarray, mhat: np.ndarray, eps: float
) -> np.ndarray:
    """Block metric [[𝒦, εM̂], [εM̂, M̂]]."""
    return np.block([[kappa_block, eps * mhat], [eps * mhat, mhat]])


def assemble_upsilon(
    a: float, b: float, gamma: float, eps: float, alpha: float, mhat: np.ndarray
) -> np.ndarray:
    n = mhat.shape[0]
    eye = np.eye(n)
    off = 0.5 * b * eye - eps * alpha * mhat
    return np.block([[a * eye, off], [off, gamma * eye - (eps + alpha) * mhat]])
