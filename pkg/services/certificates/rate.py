"""
Time-variant convergence rate α(t) and the Lyapunov function.

Along a closed-loop sample the rate is the largest α keeping

    λ̲(Υ(α))‖x‖² + λ̲(R)‖x‖² + S − 2αĜ(e) ≥ 0,

where S collects the structure-preserving inner products. The lower
eigenvalue branch of Υ is evaluated at every inertia eigenvalue of M̂(q) and
at the global bounds; the smallest resulting rate is kept.
"""

from dataclasses import dataclass

import numpy as np

from services.control import heaviside, projector

from .bounds import CertifiedModel, damping_of
from .conditions import upsilon_constants
from .models import CertificateParams, RateSample

_ROOT_TOL = 1e-9


@dataclass(frozen=True)
class RateInputs:
    """Everything the rate needs at one sample, in controller coordinates."""

    q: np.ndarray
    dq: np.ndarray
    e: np.ndarray
    de: np.ndarray
    M: np.ndarray
    C: np.ndarray
    damping: np.ndarray
    kp: np.ndarray
    kd: np.ndarray
    potential: float
    g_e: np.ndarray
    g_q: np.ndarray
    d_dq: np.ndarray

    @property
    def x_sq(self) -> float:
        return float(self.e @ self.e + self.de @ self.de)


def shifted_potential(model: CertifiedModel, e: np.ndarray) -> tuple[float, np.ndarray]:
    """Ĝ(e) − ĝ(0)ᵀe and its gradient, the potential shaped by nat-PD+."""
    offset = model.gravity(np.zeros_like(e))
    return float(model.potential(e) - offset @ e), model.gravity(e) - offset


def rate_inputs(
    model: CertifiedModel,
    q: np.ndarray,
    dq: np.ndarray,
    e: np.ndarray,
    de: np.ndarray,
    kp: np.ndarray,
    kd: np.ndarray,
    structure_preserving: bool = True,
) -> RateInputs:
    """
    Collect model terms at a sample.

    Without structure preservation gravity and friction are compensated, so
    the potential, the natural forces and the model damping drop out.
    """
    c = model.components(q, dq)
    zeros = np.zeros_like(e)
    if structure_preserving:
        potential, g_e = shifted_potential(model, e)
        g_q, d_dq = c.g, c.d
        damping = damping_of(model, de)
    else:
        potential, g_e, g_q, d_dq = 0.0, zeros, zeros, zeros
        damping = np.zeros_like(c.M)
    return RateInputs(
        q=np.asarray(q, dtype=float),
        dq=np.asarray(dq, dtype=float),
        e=np.asarray(e, dtype=float),
        de=np.asarray(de, dtype=float),
        M=c.M,
        C=c.C,
        damping=damping,
        kp=np.asarray(kp, dtype=float),
        kd=np.asarray(kd, dtype=float),
        potential=potential,
        g_e=g_e,
        g_q=g_q,
        d_dq=d_dq,
    )


def _gated(direction: np.ndarray, other: np.ndarray, force: np.ndarray, eps_reg: float):
    """(h·dᵀP_d f, h·oᵀP_d f) with h = h(dᵀf)."""
    switch = heaviside(float(direction @ force))
    if switch == 0.0 or not np.any(direction):
        return 0.0, 0.0
    projected = projector(direction, eps_reg).entries @ force
    return switch * float(direction @ projected), switch * float(other @ projected)


def coupling(inputs: RateInputs, params: CertificateParams) -> float:
    """S = ε(eᵀĝ_e + ν_e + ω_ė) + ν_ė + ω_e."""
    if not params.structure_preserving:
        return 0.0
    nu_e, omega_e = _gated(inputs.e, inputs.de, inputs.g_q, params.eps_reg)
    nu_de, omega_de = _gated(inputs.de, inputs.e, inputs.d_dq, params.eps_reg)
    natural = float(inputs.e @ inputs.g_e) + nu_e + omega_de
    return params.eps * natural + nu_de + omega_e


def r_matrix(inputs: RateInputs, params: CertificateParams) -> np.ndarray:
    """Gain and damping excess R above the constant floors plus the Coriolis term."""
    n = inputs.e.shape[0]
    eye = np.eye(n)
    bounds = params.bounds
    kp_excess = inputs.kp - bounds.kp_lower * eye
    d_excess = (
        inputs.damping
        - bounds.damping_lower * eye
        + inputs.kd
        - bounds.kd_lower * eye
    )
    eps = params.eps
    upper = 0.5 * (kp_excess + eps * (d_excess - inputs.C.T))
    lower = 0.5 * (kp_excess + eps * (d_excess - inputs.C))
    matrix = np.block([[eps * kp_excess, upper], [lower, d_excess]])
    return 0.5 * (matrix + matrix.T)


def rate_coefficients(
    params: CertificateParams, m: np.ndarray, lambda_r: float, s: float, g: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Quadratic a₀ − 2a₁α + a₂α² per inertia eigenvalue m.

    ``s`` and ``g`` are S and Ĝ already divided by ‖x‖².

    Returns:
        (a0, a1, a2, xi, zeta, varkappa)
    """
    eps, kappa = params.eps, params.kappa
    kp_half = params.bounds.kp_lower - 0.5 * params.theta
    _, b, gamma = upsilon_constants(params, 0.0)
    xi = eps * (kp_half - m) + 2.0 * s + 2.0 * lambda_r + gamma
    zeta = gamma - eps * (kp_half + m)
    varkappa = kappa + m + 4.0 * g
    a0 = xi**2 - zeta**2 - b**2
    a1 = varkappa * xi + (kappa - m) * zeta - 2.0 * eps * m * b
    a2 = varkappa**2 - (kappa - m) ** 2 - (2.0 * eps * m) ** 2
    return a0, a1, a2, xi, zeta, varkappa


def _smallest_root(
    a0: float, a1: float, a2: float, xi: float, zeta: float, varkappa: float, b: float
) -> tuple[float, bool]:
    """Smallest non-negative root with the unsquared condition still holding."""
    if xi - np.hypot(zeta, b) < -_ROOT_TOL * (1.0 + abs(xi)):
        return 0.0, False
    disc = a1 * a1 - a0 * a2
    if disc < 0.0:
        return 0.0, False
    den = a1 + np.sqrt(disc)
    if den <= 0.0:
        return 0.0, False
    alpha = max(a0 / den, 0.0)
    return alpha, xi - alpha * varkappa >= -_ROOT_TOL * (1.0 + abs(xi))


def rate_alpha(inputs: RateInputs, params: CertificateParams) -> RateSample:
    """
    Largest certified rate at one sample.

    ``region_ok`` is false where the decay condition fails even at α = 0;
    the rate is then reported as 0.
    """
    x_sq = inputs.x_sq
    degenerate = x_sq == 0.0
    s = 0.0 if degenerate else coupling(inputs, params) / x_sq
    g = 0.0 if degenerate else inputs.potential / x_sq
    lambda_r = float(np.linalg.eigvalsh(r_matrix(inputs, params))[0])

    inertia = np.linalg.eigvalsh(0.5 * (inputs.M + inputs.M.T))
    ends = [params.bounds.m_lower, params.bounds.m_upper]
    candidates = np.concatenate([inertia, ends])
    a0, a1, a2, xi, zeta, varkappa = rate_coefficients(
        params, candidates, lambda_r, s, g
    )
    _, b, _ = upsilon_constants(params, 0.0)

    best, best_index, region_ok = np.inf, 0, True
    for i in range(candidates.size):
        alpha, ok = _smallest_root(a0[i], a1[i], a2[i], xi[i], zeta[i], varkappa[i], b)
        region_ok = region_ok and ok
        if alpha < best:
            best, best_index = alpha, i
    if not region_ok:
        best = 0.0
    return RateSample(
        alpha=float(best),
        region_ok=region_ok,
        meets_floor=region_ok and best >= params.alpha_lower,
        m_star=float(candidates[best_index]),
        lambda_r=lambda_r,
        coefficients=(
            float(a0[best_index]),
            float(a1[best_index]),
            float(a2[best_index]),
        ),
        degenerate=degenerate,
    )


def _quadratic_part(
    params: CertificateParams, mass: np.ndarray, e: np.ndarray, de: np.ndarray
) -> float:
    stiffness = 0.5 * params.kappa * (e @ e)
    cross = params.eps * (e @ mass @ de)
    return float(stiffness + cross + 0.5 * (de @ mass @ de))


def lyapunov_value(inputs: RateInputs, params: CertificateParams) -> float:
    """V = Ĝ(e) + ½κ‖e‖² + εeᵀM̂ė + ½ėᵀM̂ė."""
    value = _quadratic_part(params, inputs.M, inputs.e, inputs.de)
    return value + inputs.potential if params.structure_preserving else value


def lyapunov_V(
    model: CertifiedModel,
    params: CertificateParams,
    q: np.ndarray,
    e: np.ndarray,
    de: np.ndarray,
) -> float:
    """Lyapunov function at error (e, ė) with the inertia taken at q."""
    e = np.asarray(e, dtype=float)
    de = np.asarray(de, dtype=float)
    value = _quadratic_part(params, model.components(q, np.zeros_like(q)).M, e, de)
    if params.structure_preserving:
        value += shifted_potential(model, e)[0]
    return value


@dataclass(frozen=True)
class RDecomposition:
    """Weyl-type lower bounds on λ̲(R) next to its exact value."""

    lambda_r: float
    lambda_gain: float
    lambda_damping: float
    coriolis_norm: float
    weyl_bound: float
    coriolis_scaled_bound: float


def r_decomposition(inputs: RateInputs, params: CertificateParams) -> RDecomposition:
    """
    Split R into a gain part K̃, a damping part 𝒟̃ and the Coriolis cross term.

    The gain part uses the proportional excess for both gains, so the bound
    is exact only when K̃_P = K̃_D.
    """
    n = inputs.e.shape[0]
    eye = np.eye(n)
    eps = params.eps
    kp_excess = np.linalg.eigvalsh(inputs.kp - params.bounds.kp_lower * eye)
    spread = np.sqrt(2.0 * (1.0 + eps * eps))
    branches = np.concatenate(
        [kp_excess * (1.0 + eps - spread), kp_excess * (1.0 + eps + spread)]
    )
    lambda_gain = 0.5 * float(np.min(branches))

    excess = inputs.damping - params.bounds.damping_lower * eye
    half = 0.5 * eps * excess
    damping_block = np.block([[np.zeros((n, n)), half], [half.T, excess]])
    damping_block = 0.5 * (damping_block + damping_block.T)
    lambda_damping = float(np.linalg.eigvalsh(damping_block)[0])

    coriolis_norm = float(np.linalg.norm(inputs.C, 2))
    bounds = params.bounds
    coefficient = bounds.c0 + bounds.c1 * np.linalg.norm(inputs.q)
    envelope = float(coefficient * np.linalg.norm(inputs.dq))
    return RDecomposition(
        lambda_r=float(np.linalg.eigvalsh(r_matrix(inputs, params))[0]),
        lambda_gain=lambda_gain,
        lambda_damping=lambda_damping,
        coriolis_norm=coriolis_norm,
        weyl_bound=lambda_gain + lambda_damping - 0.5 * eps * coriolis_norm,
        coriolis_scaled_bound=lambda_gain + lambda_damping - 0.5 * eps * envelope,
    )
