"""
PD+ and structure-preserving PD+ control laws.

All laws work on the tracking error e = q − q_d, ė = q̇ − q̇_d and on any
model exposing ``components``, ``gravity`` and ``dissipation``.
"""

from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np

from services.dynamics import ElComponents, JointState
from shared.exceptions import ValidationError
from shared.numerics import SymMatrix

from .models import ControllerSpec, Reference
from .primitives import adaptive_gain, heaviside, projector


class ControlModel(Protocol):
    """What the control laws need from a dynamics estimate."""

    @property
    def dof(self) -> int: ...

    def components(self, q: np.ndarray, dq: np.ndarray) -> ElComponents: ...

    def gravity(self, q: np.ndarray) -> np.ndarray: ...

    def dissipation(self, dq: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class TrackingError:
    q_d: np.ndarray
    dq_d: np.ndarray
    ddq_d: np.ndarray
    e: np.ndarray
    de: np.ndarray

    @classmethod
    def of(cls, ref: Reference, t: float, state: JointState) -> "TrackingError":
        q_d, dq_d, ddq_d = ref.evaluate(t)
        if q_d.shape != state.q.shape:
            raise ValidationError(
                f"reference has {q_d.shape[0]} dof, state has {state.dof}"
            )
        return cls(q_d, dq_d, ddq_d, state.q - q_d, state.dq - dq_d)


def feedforward(c: ElComponents, error: TrackingError) -> np.ndarray:
    """M̂q̈_d + Ĉq̇_d."""
    return c.M @ error.ddq_d + c.C @ error.dq_d


def pdp_torque(
    model: ControlModel,
    ref: Reference,
    t: float,
    state: JointState,
    kp: np.ndarray,
    kd: np.ndarray,
) -> np.ndarray:
    """PD+ with full gravity and friction compensation."""
    error = TrackingError.of(ref, t, state)
    c = model.components(state.q, state.dq)
    return feedforward(c, error) + c.g + c.d - kp @ error.e - kd @ error.de


def _keep_natural(
    force: np.ndarray, direction: np.ndarray, eps_reg: float
) -> np.ndarray:
    """(I − h(dᵀf)P_d)f: drop the part of f along d only when f pushes along d."""
    switch = heaviside(float(direction @ force))
    if switch == 0.0:
        return force
    return force - switch * (projector(direction, eps_reg).entries @ force)


def nat_law(
    model: ControlModel,
    c: ElComponents,
    error: TrackingError,
    kp: np.ndarray,
    kd: np.ndarray,
    eps_reg: float,
) -> np.ndarray:
    """
    Structure-preserving PD+ for given gains.

    The natural potential and dissipative forces are kept wherever they
    already act against the error; the desired impedance is shaped by
    ĝ(e) + K_P·e and d̂(ė) + K_D·ė, with ĝ shifted to vanish at e = 0.
    """
    dof = error.e.shape[0]
    shifted = model.gravity(error.e) - model.gravity(np.zeros(dof))
    desired_potential = shifted + kp @ error.e
    desired_dissipation = model.dissipation(error.de) + kd @ error.de
    return (
        feedforward(c, error)
        + _keep_natural(c.g, error.e, eps_reg)
        - desired_potential
        + _keep_natural(c.d, error.de, eps_reg)
        - desired_dissipation
    )


def controller_gains(
    spec: ControllerSpec, sigma: Optional[SymMatrix | np.ndarray] = None
) -> tuple[np.ndarray, np.ndarray]:
    """(K_P, K_D): base gains, plus the adaptive part for var_nat_pdp."""
    if spec.kind != "var_nat_pdp":
        return spec.kp, spec.kd
    if sigma is None:
        raise ValidationError("var_nat_pdp needs the torque covariance")
    adaptive = adaptive_gain(spec.adaptation, sigma)
    return spec.kp + adaptive, spec.kd + adaptive


def nat_pdp_torque(
    model: ControlModel,
    ref: Reference,
    t: float,
    state: JointState,
    spec: ControllerSpec,
    sigma: Optional[SymMatrix | np.ndarray] = None,
) -> np.ndarray:
    """
    nat-PD+ (static gains) or var-nat-PD+ (gains adapted to Σ_τ).

    Raises:
        ValidationError: If ``spec`` is plain PD+ or Σ_τ is missing for var-nat-PD+
    """
    if not spec.structure_preserving:
        raise ValidationError("nat_pdp_torque called with a PD+ spec")
    error = TrackingError.of(ref, t, state)
    kp, kd = controller_gains(spec, sigma)
    c = model.components(state.q, state.dq)
    return nat_law(model, c, error, kp, kd, spec.eps_reg)
