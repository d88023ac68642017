"""
Worst-case bounds entering the certificates.

Gain bounds are closed form. Inertia, damping and Coriolis bounds are
sampled from the model over the reference tube widened by a margin, so they
are only as sound as the sampling density.
"""

from typing import Optional, Protocol

import numpy as np
from scipy.optimize import linprog

from services.control import ControllerSpec, GainAdaptation, Reference
from services.dynamics import ElComponents
from shared.config import CertificateConfig
from shared.exceptions import ValidationError
from shared.utils.logging import get_logger

from .models import GainBounds, WorstCaseBounds

logger = get_logger(__name__)

_MAX_SAMPLES = 4096


class CertifiedModel(Protocol):
    """Dynamics estimate as seen by the certificates."""

    @property
    def dof(self) -> int: ...

    def components(self, q: np.ndarray, dq: np.ndarray) -> ElComponents: ...

    def gravity(self, q: np.ndarray) -> np.ndarray: ...

    def dissipation(self, dq: np.ndarray) -> np.ndarray: ...

    def potential(self, q: np.ndarray) -> float: ...


def gain_bounds(
    g: GainAdaptation, sigma_rate_lower: float = 0.0, sigma_rate_upper: float = 0.0
) -> GainBounds:
    """
    Interval of the adaptive gain and of its rate.

    The lower gain bound is the harmonic combination of k̲₃²k̲₂ and k̲₁; the
    upper one is k̄₁. The rate bounds scale the supplied bounds on Σ̇.

    Raises:
        ValidationError: If the lower covariance-rate bound is positive
    """
    if sigma_rate_lower > 0.0 or sigma_rate_upper < 0.0:
        raise ValidationError(
            "covariance rate bounds must satisfy lower <= 0 <= upper",
            details={"lower": sigma_rate_lower, "upper": sigma_rate_upper},
        )
    k1_lo, k1_hi = g.bounds["k1"]
    k2_lo, _ = g.bounds["k2"]
    k3_lo, k3_hi = g.bounds["k3"]
    scale = (k1_hi * k3_hi / (k3_lo**2 * k2_lo + k1_lo)) ** 2
    return GainBounds(
        k_lower=1.0 / (1.0 / (k3_lo**2 * k2_lo) + 1.0 / k1_lo),
        k_upper=k1_hi,
        rate_lower=-scale * abs(sigma_rate_lower),
        rate_upper=scale * sigma_rate_upper,
    )


def gain_floors(spec: ControllerSpec) -> tuple[float, float]:
    """(k̲_P, k̲_D) of a controller; adaptive gains add their Σ = 0 floor."""
    kp_lo = float(np.linalg.eigvalsh(spec.kp)[0])
    kd_lo = float(np.linalg.eigvalsh(spec.kd)[0])
    if spec.kind == "var_nat_pdp":
        floor = gain_bounds(spec.adaptation).k_lower
        kp_lo += floor
        kd_lo += floor
    return kp_lo, kd_lo


def fit_coriolis(q_norms: np.ndarray, ratios: np.ndarray) -> tuple[float, float]:
    """
    Tightest affine envelope c0 + c1‖q‖ above the sampled ‖Ĉ‖/‖q̇‖.

    Solved as a linear program minimizing the summed envelope.
    """
    q_norms = np.asarray(q_norms, dtype=float)
    ratios = np.asarray(ratios, dtype=float)
    if q_norms.shape != ratios.shape or q_norms.size == 0:
        raise ValidationError("Coriolis samples must be non-empty and aligned")
    result = linprog(
        c=[q_norms.size, float(np.sum(q_norms))],
        A_ub=-np.column_stack([np.ones_like(q_norms), q_norms]),
        b_ub=-ratios,
        bounds=[(0.0, None), (0.0, None)],
        method="highs",
    )
    if not result.success:
        logger.warning("certificates.coriolis_fit_failed", status=result.message)
        return float(np.max(ratios)), 0.0
    c0, c1 = result.x
    return float(c0), float(c1)


def _tube_samples(
    low: np.ndarray, high: np.ndarray, points: int, rng: np.random.Generator
) -> np.ndarray:
    """Full grid over the box when small enough, uniform draws otherwise."""
    dof = low.shape[0]
    if points**dof <= _MAX_SAMPLES:
        axes = [np.linspace(lo, hi, points) for lo, hi in zip(low, high)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dof)
    return rng.uniform(low, high, size=(_MAX_SAMPLES, dof))


def _reference_box(
    ref: Reference, t_end: float, margin: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    samples = [ref.evaluate(t) for t in np.linspace(0.0, t_end, 200)]
    q = np.array([s[0] for s in samples])
    dq = np.array([s[1] for s in samples])
    return (
        q.min(axis=0) - margin,
        q.max(axis=0) + margin,
        dq.min(axis=0) - margin,
        dq.max(axis=0) + margin,
    )


def damping_of(model: CertifiedModel, dq: np.ndarray) -> np.ndarray:
    """Model damping matrix D̂(q̇)."""
    damping = model.components(np.zeros_like(dq), dq).damping
    return np.zeros((model.dof, model.dof)) if damping is None else damping


def estimate_bounds(
    model: CertifiedModel,
    ref: Reference,
    spec: ControllerSpec,
    cfg: CertificateConfig,
    t_end: float,
    delta: Optional[float] = None,
    seed: int = 0,
) -> WorstCaseBounds:
    """
    Sample m̲̂, m̄̂, d̲̂ and the Coriolis coefficients over the reference tube.

    For plain PD+ the model friction is compensated, so the damping floor is
    the derivative gain alone.
    """
    rng = np.random.default_rng(seed)
    q_lo, q_hi, dq_lo, dq_hi = _reference_box(ref, t_end, cfg.tube_margin)
    q_samples = _tube_samples(q_lo, q_hi, cfg.bound_points, rng)
    dq_samples = _tube_samples(dq_lo, dq_hi, cfg.bound_points, rng)
    dof = model.dof

    m_lower, m_upper = np.inf, 0.0
    q_norms, ratios = [], []
    for q in q_samples:
        direction = rng.normal(size=dof)
        direction /= np.linalg.norm(direction)
        c = model.components(q, direction)
        eigenvalues = np.linalg.eigvalsh(0.5 * (c.M + c.M.T))
        m_lower = min(m_lower, float(eigenvalues[0]))
        m_upper = max(m_upper, float(eigenvalues[-1]))
        q_norms.append(float(np.linalg.norm(q)))
        ratios.append(float(np.linalg.norm(c.C, 2)))

    if m_lower <= 0.0:
        raise ValidationError(
            "model inertia is not positive definite over the task region",
            details={"m_lower": m_lower},
        )

    damping_lower = 0.0
    if spec.structure_preserving:
        candidates = np.vstack([np.zeros((1, dof)), dq_samples])
        damping_lower = min(
            float(np.linalg.eigvalsh(0.5 * (d + d.T))[0])
            for d in (damping_of(model, dq) for dq in candidates)
        )
        damping_lower = max(damping_lower, 0.0)

    c0, c1 = fit_coriolis(np.array(q_norms), np.array(ratios))
    kp_lower, kd_lower = gain_floors(spec)
    bounds = WorstCaseBounds(
        m_lower=m_lower,
        m_upper=m_upper,
        damping_lower=damping_lower,
        kp_lower=kp_lower,
        kd_lower=kd_lower,
        delta=cfg.delta if delta is None else delta,
        c0=c0,
        c1=c1,
    )
    logger.info(
        "certificates.bounds_estimated",
        controller=spec.name,
        samples=len(q_samples),
        m_lower=m_lower,
        m_upper=m_upper,
        d_lower=bounds.d_lower,
        kp_lower=kp_lower,
    )
    return bounds
