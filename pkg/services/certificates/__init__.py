"""
Exponential stability certificates for the structure-preserving PD+ family.
"""

from .bounds import (
    CertifiedModel,
    damping_of,
    estimate_bounds,
    fit_coriolis,
    gain_bounds,
    gain_floors,
)
from .certify import REQUIRED_ANNOTATIONS, certify
from .conditions import (
    feasibility,
    kappa_phi,
    make_params,
    metric_bounds,
    mu_floor,
    radius,
    upsilon_constants,
    upsilon_floor,
    worst_case_radius,
)
from .models import (
    TRACE_COLUMNS,
    CertificateParams,
    CertificateTrace,
    FeasibilityReport,
    GainBounds,
    RateSample,
    WorstCaseBounds,
)
from .optimizer import optimize_cert_params
from .rate import (
    RateInputs,
    RDecomposition,
    coupling,
    lyapunov_V,
    lyapunov_value,
    r_decomposition,
    r_matrix,
    rate_alpha,
    rate_coefficients,
    rate_inputs,
    shifted_potential,
)

__all__ = [
    "WorstCaseBounds",
    "GainBounds",
    "CertificateParams",
    "CertificateTrace",
    "FeasibilityReport",
    "RateSample",
    "TRACE_COLUMNS",
    "CertifiedModel",
    "gain_bounds",
    "gain_floors",
    "fit_coriolis",
    "damping_of",
    "estimate_bounds",
    "kappa_phi",
    "feasibility",
    "make_params",
    "metric_bounds",
    "mu_floor",
    "radius",
    "upsilon_constants",
    "upsilon_floor",
    "worst_case_radius",
    "RateInputs",
    "RDecomposition",
    "rate_inputs",
    "rate_alpha",
    "rate_coefficients",
    "coupling",
    "r_matrix",
    "r_decomposition",
    "lyapunov_V",
    "lyapunov_value",
    "shifted_potential",
    "certify",
    "REQUIRED_ANNOTATIONS",
    "optimize_cert_params",
]
