"""
Closed-form certificate parameters, feasibility conditions and metric floors.
"""

from typing import Optional

import numpy as np

from shared.exceptions import CertificateVoidError, InfeasibilityError
from shared.numerics import upsilon_pair

from .models import CertificateParams, FeasibilityReport, WorstCaseBounds


def kappa_phi(
    bounds: WorstCaseBounds, eps: float, theta: float, alpha_lower: float
) -> tuple[float, float]:
    """Virtual stiffness κ and scale φ centring the Υ spectrum."""
    kp, d, m_sum = bounds.kp_lower, bounds.d_lower, bounds.m_sum
    kappa = kp + eps * (d - alpha_lower * m_sum)
    phi = 2.0 * (d - eps * (kp - 0.5 * theta) + alpha_lower * kappa) - (
        eps + alpha_lower
    ) * m_sum
    return kappa, phi


def upsilon_constants(
    params: CertificateParams, alpha: float
) -> tuple[float, float, float]:
    """(a, b, γ) of Υ(α)."""
    bounds = params.bounds
    a = params.eps * (bounds.kp_lower - 0.5 * params.theta) - alpha * params.kappa
    b = bounds.kp_lower + params.eps * bounds.d_lower - params.kappa
    gamma = bounds.d_lower - 0.5 * params.phi
    return a, b, gamma


def upsilon_floor(params: CertificateParams, alpha: Optional[float] = None) -> float:
    """
    λ̲(Υ(α)) over all inertia eigenvalues in [m̲̂, m̄̂].

    The lower branch is concave in the inertia eigenvalue, so the interval
    ends are enough.
    """
    alpha = params.alpha_lower if alpha is None else alpha
    a, b, gamma = upsilon_constants(params, alpha)
    ends = np.array([params.bounds.m_lower, params.bounds.m_upper])
    lower, _ = upsilon_pair(a, b, gamma, params.eps, alpha, ends)
    return float(np.min(lower))


def feasibility(
    eps: float, theta: float, alpha_lower: float, bounds: WorstCaseBounds
) -> FeasibilityReport:
    """Check every parameter condition and name the violated ones."""
    report = FeasibilityReport()
    kp, d, m_sum, m_hi = bounds.kp_lower, bounds.d_lower, bounds.m_sum, bounds.m_upper
    kappa, phi = kappa_phi(bounds, eps, theta, alpha_lower)
    report.values.update({"kappa": kappa, "phi": phi})

    def require(name: str, holds: bool) -> None:
        if not holds:
            report.violations.append(name)

    require("eps_positive", eps > 0.0)
    require("theta_positive", theta > 0.0)
    require("alpha_positive", alpha_lower > 0.0)
    if eps <= 0.0 or theta <= 0.0:
        return report

    damping_den = kp - 0.5 * theta + m_sum
    require("eps_damping", damping_den <= 0.0 or eps < d / damping_den)
    slack = d - alpha_lower * m_sum
    eps_cap = (slack + np.sqrt(slack**2 + 4.0 * m_hi**2 * kp)) / (2.0 * m_hi)
    report.values["eps_cap"] = float(eps_cap)
    require("eps_inertia", eps < eps_cap)
    require("theta_bound", theta < 2.0 * (kp + m_sum))

    alpha0 = (kp + eps * d - 0.5 * m_sum) / (2.0 * eps * m_sum)
    radicand = alpha0**2 + (d - eps * (kp - 0.5 * theta + m_sum)) / (eps * m_sum)
    require("alpha_damping", alpha_lower < d / m_sum)
    alpha_cap = alpha0 + np.sqrt(max(radicand, 0.0))
    require("alpha_quadratic", radicand >= 0.0 and alpha_lower < alpha_cap)
    require("kappa_positive", kappa > 0.0)
    require("phi_positive", phi > 0.0)
    require("metric_positive", kappa > 0.0 and eps < np.sqrt(kappa / m_hi))
    return report


def make_params(
    bounds: WorstCaseBounds,
    eps: float,
    theta: float,
    alpha_lower: float,
    structure_preserving: bool = True,
    eps_reg: float = 1e-3,
    check: bool = True,
) -> CertificateParams:
    """
    Certificate parameters with κ and φ derived from the bounds.

    Raises:
        InfeasibilityError: If ``check`` is set and a condition is violated
    """
    if check:
        report = feasibility(eps, theta, alpha_lower, bounds)
        if not report.ok:
            raise InfeasibilityError(
                "certificate parameters violate the stability conditions",
                violations=report.violations,
            )
    kappa, phi = kappa_phi(bounds, eps, theta, alpha_lower)
    return CertificateParams(
        eps=eps,
        theta=theta,
        alpha_lower=alpha_lower,
        kappa=kappa,
        phi=phi,
        bounds=bounds,
        structure_preserving=structure_preserving,
        eps_reg=eps_reg,
    )


def metric_bounds(
    params: CertificateParams, kappa_range: Optional[tuple[float, float]] = None
) -> tuple[float, float]:
    """
    Spectral enclosure (μ̲, μ̄) of the block metric for stiffness in [κ̲, κ̄].

    Raises:
        InfeasibilityError: Unless 0 < ε < √(m̲̂κ̲)/m̄̂
    """
    if kappa_range is None:
        kappa_range = (params.kappa, params.kappa)
    k_lo, k_hi = kappa_range
    m_lo, m_hi = params.bounds.m_lower, params.bounds.m_upper
    eps = params.eps
    if k_lo <= 0.0 or not 0.0 < eps < np.sqrt(m_lo * k_lo) / m_hi:
        raise InfeasibilityError(
            "metric is not uniformly positive definite",
            violations=["metric_eps"],
        )
    coupling = (2.0 * eps * m_hi) ** 2
    mu_lower = 0.5 * (k_lo + m_lo - np.sqrt((k_lo - m_lo) ** 2 + coupling))
    mu_upper = 0.5 * (k_hi + m_hi + np.sqrt((k_hi - m_hi) ** 2 + coupling))
    return float(mu_lower), float(mu_upper)


def mu_floor(
    kappa: float, m_lower: float, eps: float, potential: float = 0.0, x_sq: float = 0.0
) -> float:
    """
    Time-variant metric floor μ̲(t).

    The potential contributes 2Ĝ(e)/‖x‖²; at x = 0 only the κ part is kept.
    """
    spread = np.sqrt((0.5 * (kappa - m_lower)) ** 2 + (eps * m_lower) ** 2)
    floor = 0.5 * (kappa + m_lower) - spread
    if x_sq > 0.0:
        floor += 2.0 * potential / x_sq
    return float(floor)


def radius(params: CertificateParams, mu_lower: float) -> float:
    """
    Ball radius ρ = Δ√((ε/ϑ + 1/φ)/(2μ̲)).

    Raises:
        CertificateVoidError: If μ̲ ≤ 0
    """
    if not mu_lower > 0.0:
        raise CertificateVoidError(f"metric floor {mu_lower:.3e} is not positive")
    return float(params.bounds.delta * np.sqrt(params.noise_weight / (2.0 * mu_lower)))


def worst_case_radius(params: CertificateParams) -> float:
    """ρ̲ from the constant bounds, potential term dropped."""
    return radius(params, mu_floor(params.kappa, params.bounds.m_lower, params.eps))
