"""
Certification of recorded closed-loop trajectories.
"""

import numpy as np
from scipy.integrate import cumulative_trapezoid

from services.dynamics import Trajectory
from shared.exceptions import CertificateVoidError, ValidationError
from shared.utils.logging import get_logger

from .bounds import CertifiedModel
from .conditions import mu_floor, radius
from .models import CertificateParams, CertificateTrace
from .rate import lyapunov_value, rate_alpha, rate_inputs

logger = get_logger(__name__)

REQUIRED_ANNOTATIONS = ("q", "dq", "e", "de", "kp", "kd")


def certify(
    traj: Trajectory, model: CertifiedModel, params: CertificateParams, stride: int = 1
) -> CertificateTrace:
    """
    Evaluate V, α, ρ and the decay envelope along a trajectory.

    The envelope is ρ(t) + √(2·max(V(t₀) − V̲, 0)/μ̲(t))·exp(−∫α).
    Samples whose error norm exceeds it are flagged; samples with a
    non-positive metric floor get an infinite radius and are never flagged.

    Raises:
        ValidationError: If the trajectory lacks controller annotations
    """
    missing = [name for name in REQUIRED_ANNOTATIONS if name not in traj.annotations]
    if missing:
        raise ValidationError(
            "trajectory is missing controller annotations", details={"missing": missing}
        )
    if stride < 1:
        raise ValidationError("stride must be at least 1")

    notes = traj.annotations
    index = np.arange(0, len(traj), stride)
    count = index.size
    V = np.empty(count)
    alpha = np.empty(count)
    rho = np.empty(count)
    mu = np.empty(count)
    err_norm = np.empty(count)
    region_ok = np.empty(count, dtype=bool)

    for k, i in enumerate(index):
        inputs = rate_inputs(
            model,
            notes["q"][i],
            notes["dq"][i],
            notes["e"][i],
            notes["de"][i],
            notes["kp"][i],
            notes["kd"][i],
            params.structure_preserving,
        )
        x_sq = inputs.x_sq
        m_lower = float(np.linalg.eigvalsh(0.5 * (inputs.M + inputs.M.T))[0])
        potential = inputs.potential if params.structure_preserving else 0.0
        mu[k] = mu_floor(params.kappa, m_lower, params.eps, potential, x_sq)
        try:
            rho[k] = radius(params, mu[k])
        except CertificateVoidError:
            rho[k] = np.inf
        sample = rate_alpha(inputs, params)
        alpha[k] = sample.alpha
        region_ok[k] = sample.region_ok
        V[k] = lyapunov_value(inputs, params)
        err_norm[k] = np.sqrt(x_sq)

    times = traj.times[index]
    decay = np.exp(-cumulative_trapezoid(alpha, times, initial=0.0)) if count else alpha
    excess = max(V[0] - params.v_floor, 0.0) if count else 0.0
    positive = mu > 0.0
    transient = np.full(count, np.inf)
    transient[positive] = np.sqrt(2.0 * excess / mu[positive])
    envelope = rho + transient * decay
    violated = np.isfinite(envelope) & (err_norm > envelope * (1.0 + 1e-9) + 1e-12)

    trace = CertificateTrace(
        times=times,
        V=V,
        alpha=alpha,
        rho=rho,
        envelope=envelope,
        err_norm=err_norm,
        violated=violated,
        mu_lower=mu,
        region_ok=region_ok,
        label=traj.label,
        params=params,
    )
    logger.info(
        "certificates.certified",
        label=traj.label,
        samples=count,
        violations=trace.violations,
        void=trace.void_samples,
        region_failures=int(np.count_nonzero(~region_ok)),
    )
    return trace
