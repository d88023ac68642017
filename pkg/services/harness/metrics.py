"""
Steady-state performance metrics of a trajectory.
"""

import numpy as np
from scipy.integrate import trapezoid

from services.dynamics import Trajectory
from shared.exceptions import ValidationError

from .models import MetricsRow


def l2_norm(times: np.ndarray, values: np.ndarray, dt: float) -> float:
    """
    √∫‖v‖²dt by the trapezoidal rule.

    A single sample is treated as a held value over one step: ‖v‖·√dt.
    """
    squared = np.sum(np.atleast_2d(values) ** 2, axis=1)
    if squared.size == 1:
        return float(np.sqrt(squared[0] * dt))
    return float(np.sqrt(trapezoid(squared, times)))


def _column(
    traj: Trajectory, name: str, fallback: np.ndarray | None = None
) -> np.ndarray:
    if name in traj.annotations:
        return np.asarray(traj.annotations[name], dtype=float)
    if fallback is None:
        raise ValidationError(
            f"trajectory '{traj.label}' lacks the '{name}' annotation"
        )
    return fallback


def metrics(
    traj: Trajectory, window_start: float, label: str | None = None
) -> MetricsRow:
    """
    Torque and tracking metrics over samples with t ≥ ``window_start``.

    Torques are the controller's (CC torques for the soft robot). A diverged
    run yields a row of NaNs flagged ``diverged``.

    Raises:
        ValidationError: If the window holds no sample of a finished run
    """
    name = label or traj.label
    if traj.diverged:
        return MetricsRow.diverged_row(name)
    index = traj.window(window_start)
    if index.size == 0:
        t_end = float(traj.times[-1]) if len(traj) else None
        raise ValidationError(
            "metrics window is empty",
            details={"window_start": window_start, "t_end": t_end},
        )

    times = traj.times[index]
    tau = _column(traj, "tau", traj.tau)[index]
    e = _column(traj, "e")[index]
    de = _column(traj, "de")[index]
    dt = traj.dt

    tau_norm = np.linalg.norm(tau, axis=1)
    e_norm = np.linalg.norm(e, axis=1)
    de_norm = np.linalg.norm(de, axis=1)
    return MetricsRow(
        controller=name,
        tau_l2=l2_norm(times, tau, dt),
        tau_max=float(np.max(tau_norm)),
        tau_mean=float(np.mean(tau_norm)),
        err_l2=l2_norm(times, np.hstack([e, de]), dt),
        e_max=float(np.max(e_norm)),
        de_max=float(np.max(de_norm)),
        e_mean=float(np.mean(e_norm)),
        de_mean=float(np.mean(de_norm)),
        samples=int(index.size),
    )
