"""
Domain types of the stability certificates.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd

from shared.exceptions import ValidationError
from shared.utils.validators import validators

TRACE_COLUMNS = ["t", "V", "alpha", "rho", "envelope", "err_norm", "violated"]


@dataclass(frozen=True)
class GainBounds:
    """Spectral interval of K(Σ) and of its rate K̇."""

    k_lower: float
    k_upper: float
    rate_lower: float
    rate_upper: float


@dataclass(frozen=True)
class WorstCaseBounds:
    """
    Constant bounds over the task region.

    ``damping_lower`` is the floor of the model damping D̂ alone; ``d_lower``
    adds the derivative gain floor. Coriolis coefficients bound
    ‖Ĉ‖ ≤ (c0 + c1‖q‖)‖q̇‖.
    """

    m_lower: float
    m_upper: float
    damping_lower: float
    kp_lower: float
    kd_lower: float
    delta: float
    c0: float = 0.0
    c1: float = 0.0

    def __post_init__(self) -> None:
        validators.validate_positive(self.m_lower, "m_lower")
        if self.m_upper < self.m_lower:
            raise ValidationError("m_upper must not be below m_lower")
        validators.validate_positive(self.kp_lower, "kp_lower")
        validators.validate_range(self.kd_lower, "kd_lower", min_value=0.0)
        validators.validate_range(self.delta, "delta", min_value=0.0)
        validators.validate_range(self.c0, "c0", min_value=0.0)
        validators.validate_range(self.c1, "c1", min_value=0.0)
        if self.d_lower <= 0.0:
            raise ValidationError(
                "damping floor must be positive", details={"d_lower": self.d_lower}
            )

    @property
    def d_lower(self) -> float:
        return self.damping_lower + self.kd_lower

    @property
    def m_sum(self) -> float:
        return self.m_lower + self.m_upper

    def with_delta(self, delta: float) -> "WorstCaseBounds":
        return WorstCaseBounds(
            m_lower=self.m_lower,
            m_upper=self.m_upper,
            damping_lower=self.damping_lower,
            kp_lower=self.kp_lower,
            kd_lower=self.kd_lower,
            delta=delta,
            c0=self.c0,
            c1=self.c1,
        )


@dataclass
class FeasibilityReport:
    """Outcome of the parameter conditions; empty ``violations`` means feasible."""

    violations: list[str] = field(default_factory=list)
    values: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class CertificateParams:
    """Chosen ε, ϑ, α̲ with the derived virtual stiffness κ and scale φ."""

    eps: float
    theta: float
    alpha_lower: float
    kappa: float
    phi: float
    bounds: WorstCaseBounds
    structure_preserving: bool = True
    eps_reg: float = 1e-3

    @property
    def noise_weight(self) -> float:
        """ε/ϑ + 1/φ."""
        return self.eps / self.theta + 1.0 / self.phi

    @property
    def v_floor(self) -> float:
        """V̲ = (ε/ϑ + 1/φ)Δ²/4."""
        return self.noise_weight * self.bounds.delta**2 / 4.0


@dataclass(frozen=True)
class RateSample:
    """Time-variant rate at one sample."""

    alpha: float
    region_ok: bool
    meets_floor: bool
    m_star: float
    lambda_r: float
    coefficients: tuple[float, float, float]
    degenerate: bool = False


@dataclass
class CertificateTrace:
    """Per-sample certificate quantities along one trajectory."""

    times: np.ndarray
    V: np.ndarray
    alpha: np.ndarray
    rho: np.ndarray
    envelope: np.ndarray
    err_norm: np.ndarray
    violated: np.ndarray
    mu_lower: np.ndarray
    region_ok: np.ndarray
    label: str = ""
    params: Optional[CertificateParams] = None

    def __len__(self) -> int:
        return len(self.times)

    @property
    def violations(self) -> int:
        return int(np.count_nonzero(self.violated))

    @property
    def void_samples(self) -> int:
        return int(np.count_nonzero(~np.isfinite(self.rho)))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "t": self.times,
                "V": self.V,
                "alpha": self.alpha,
                "rho": self.rho,
                "envelope": self.envelope,
                "err_norm": self.err_norm,
                "violated": self.violated.astype(int),
            },
            columns=TRACE_COLUMNS,
        )
