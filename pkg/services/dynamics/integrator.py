"""
Fixed-step closed-loop integration with zero-order hold on the torque.
"""

from collections import defaultdict
from typing import Any, Literal, Protocol

import numpy as np

from shared.exceptions import NumericError, ValidationError
from shared.numerics import solve_spd
from shared.utils.logging import get_logger

from .models import JointState, Trajectory
from .plants import LagrangianModel

logger = get_logger(__name__)

DIVERGENCE_THRESHOLD = 1e6

Method = Literal["rk4", "semi_implicit"]


class Controller(Protocol):
    """Anything producing a torque from time and measured state."""

    def torque(self, t: float, q: np.ndarray, dq: np.ndarray) -> np.ndarray: ...


class ConstantTorque:
    """Open-loop constant torque, also used for the zero-input runs."""

    def __init__(self, tau: np.ndarray):
        self.tau = np.asarray(tau, dtype=float)

    def torque(self, t: float, q: np.ndarray, dq: np.ndarray) -> np.ndarray:
        return self.tau


def rk4_step(
    plant: LagrangianModel, q: np.ndarray, dq: np.ndarray, tau: np.ndarray, h: float
) -> tuple[np.ndarray, np.ndarray]:
    k1_q, k1_v = dq, plant.acceleration(q, dq, tau)
    k2_q = dq + 0.5 * h * k1_v
    k2_v = plant.acceleration(q + 0.5 * h * k1_q, k2_q, tau)
    k3_q = dq + 0.5 * h * k2_v
    k3_v = plant.acceleration(q + 0.5 * h * k2_q, k3_q, tau)
    k4_q = dq + h * k3_v
    k4_v = plant.acceleration(q + h * k3_q, k4_q, tau)
    q_next = q + h / 6.0 * (k1_q + 2.0 * k2_q + 2.0 * k3_q + k4_q)
    dq_next = dq + h / 6.0 * (k1_v + 2.0 * k2_v + 2.0 * k3_v + k4_v)
    return q_next, dq_next


def semi_implicit_step(
    plant: LagrangianModel,
    q: np.ndarray,
    dq: np.ndarray,
    tau: np.ndarray,
    h: float,
    stiff: tuple[np.ndarray, np.ndarray],
) -> tuple[np.ndarray, np.ndarray]:
    """
    Linearly implicit Euler on the constant spring and damper terms.

    Solves (M + hD + h²K)Δv = h(F − hKv) with F = τ − bias, then
    v⁺ = v + Δv and q⁺ = q + h·v⁺.
    """
    stiffness, damping = stiff
    mass, bias = plant.mass_and_bias(q, dq)
    lhs = mass + h * damping + h * h * stiffness
    delta = solve_spd(lhs, h * (tau - bias - h * stiffness @ dq))
    dq_next = dq + delta
    return q + h * dq_next, dq_next


def integrate(
    plant: LagrangianModel,
    controller: Controller,
    x0: JointState,
    t_end: float,
    dt: float,
    method: Method = "rk4",
    substeps: int = 1,
    label: str = "",
    divergence_threshold: float = DIVERGENCE_THRESHOLD,
) -> Trajectory:
    """
    Simulate ``plant`` under ``controller`` from ``x0``.

    The controller is queried once per step of length ``dt``; its torque is
    held over ``substeps`` integration steps. When the controller exposes
    ``annotation()`` the returned mapping is recorded per sample.

    Returns:
        Trajectory: Samples at t = 0, dt, ..., truncated at divergence

    Raises:
        ValidationError: If dt, t_end or the state dimension are inconsistent
    """
    if dt <= 0.0:
        raise ValidationError("dt must be positive", details={"dt": dt})
    if t_end < dt:
        raise ValidationError("t_end must be at least dt", details={"t_end": t_end})
    if x0.dof != plant.dof:
        raise ValidationError(
            f"initial state has {x0.dof} entries, plant has {plant.dof}"
        )
    if method not in ("rk4", "semi_implicit"):
        raise ValidationError(f"unknown integration method '{method}'")
    if substeps < 1:
        raise ValidationError("substeps must be at least 1")

    n_steps = int(round(t_end / dt))
    h = dt / substeps
    times = np.arange(n_steps + 1) * dt
    dof = plant.dof

    q_log = np.empty((n_steps + 1, dof))
    dq_log = np.empty((n_steps + 1, dof))
    tau_log: list[np.ndarray] = []
    notes: dict[str, list[Any]] = defaultdict(list)
    annotate = getattr(controller, "annotation", None)
    stiff = plant.stiff_terms() if method == "semi_implicit" else None

    q, dq = x0.q.copy(), x0.dq.copy()
    recorded = 0
    divergence: tuple[float, str] | None = None

    for k in range(n_steps + 1):
        t = float(times[k])
        try:
            tau = np.asarray(controller.torque(t, q, dq), dtype=float)
        except NumericError as exc:
            divergence = (t, f"controller failed: {exc.message}")
            break
        if not np.all(np.isfinite(tau)):
            divergence = (t, "non-finite torque")
            break

        q_log[k], dq_log[k] = q, dq
        tau_log.append(tau)
        if annotate is not None:
            for name, value in annotate().items():
                notes[name].append(value)
        recorded = k + 1
        if k == n_steps:
            break

        try:
            for _ in range(substeps):
                if stiff is None:
                    q, dq = rk4_step(plant, q, dq, tau, h)
                else:
                    q, dq = semi_implicit_step(plant, q, dq, tau, h, stiff)
        except NumericError as exc:
            divergence = (float(times[k + 1]), f"plant step failed: {exc.message}")
            break

        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(dq))):
            divergence = (float(times[k + 1]), "non-finite state")
            break
        if max(np.linalg.norm(q), np.linalg.norm(dq)) > divergence_threshold:
            divergence = (float(times[k + 1]), "state norm above threshold")
            break

    trajectory = Trajectory(
        times=times[:recorded].copy(),
        q=q_log[:recorded].copy(),
        dq=dq_log[:recorded].copy(),
        tau=np.array(tau_log).reshape(recorded, -1) if recorded else np.empty((0, dof)),
        annotations={name: np.asarray(values) for name, values in notes.items()},
        label=label,
    )
    if divergence is not None:
        trajectory.diverged = True
        trajectory.divergence_time, trajectory.divergence_reason = divergence
        logger.warning(
            "integrate.diverged",
            label=label,
            time=divergence[0],
            reason=divergence[1],
        )
    return trajectory
