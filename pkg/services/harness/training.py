"""
Training data recipes and model fitting.
"""

from typing import Optional

import numpy as np
import pandas as pd

from services.dynamics import ConstantTorque, JointState, integrate
from services.lgp import (
    Hyperparams,
    LgpModel,
    ResimulationTarget,
    TrainingSet,
    fit,
    optimize_hyper,
    predict_tau,
)
from shared.config import ExperimentConfig, GridSpec
from shared.exceptions import ConfigurationError
from shared.utils.logging import get_logger

from .models import FitResult
from .setup import Setup

logger = get_logger(__name__)


def position_grid(
    spec: GridSpec, dof: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rows of an equidistant position grid at fixed velocity and acceleration."""
    if len(spec.velocity) != dof or len(spec.acceleration) != dof:
        raise ConfigurationError(
            "training", f"grid velocity/acceleration need {dof} entries"
        )
    axis = np.linspace(-spec.half_width, spec.half_width, spec.points)
    q = np.stack(np.meshgrid(*([axis] * dof), indexing="ij"), axis=-1).reshape(-1, dof)
    dq = np.tile(np.asarray(spec.velocity, dtype=float), (q.shape[0], 1))
    ddq = np.tile(np.asarray(spec.acceleration, dtype=float), (q.shape[0], 1))
    return q, dq, ddq


def _observe(
    setup: Setup,
    q: np.ndarray,
    dq: np.ndarray,
    ddq: np.ndarray,
    torque_noise: float,
    acceleration_noise: float,
    rng: np.random.Generator,
) -> TrainingSet:
    """Exact plant torques, then noisy torques and accelerations."""
    y = np.array([setup.plant.inverse_dynamics(*row) for row in zip(q, dq, ddq)])
    if torque_noise > 0.0:
        y = y + rng.normal(0.0, torque_noise, size=y.shape)
    if acceleration_noise > 0.0:
        ddq = ddq + rng.normal(0.0, acceleration_noise, size=ddq.shape)
    return TrainingSet(
        q=q,
        dq=dq,
        ddq=ddq,
        y=y,
        torque_noise=torque_noise,
        acceleration_noise=acceleration_noise,
    )


def _two_link_sets(
    setup: Setup, rng: np.random.Generator
) -> tuple[TrainingSet, TrainingSet]:
    recipe = setup.config.training
    dof = setup.dof
    blocks = [position_grid(spec, dof) for spec in recipe.position_grids]
    if recipe.velocity_grid is not None:
        axis = np.linspace(
            -recipe.velocity_grid.half_width,
            recipe.velocity_grid.half_width,
            recipe.velocity_grid.points,
        )
        mesh = np.meshgrid(*([axis] * dof), indexing="ij")
        dq = np.stack(mesh, axis=-1).reshape(-1, dof)
        blocks.append((np.zeros_like(dq), dq, np.zeros_like(dq)))
    if not blocks:
        raise ConfigurationError(
            "training.position_grids", "no training rows configured"
        )
    q, dq, ddq = (np.vstack(parts) for parts in zip(*blocks))
    training = _observe(
        setup, q, dq, ddq, recipe.torque_noise, recipe.acceleration_noise, rng
    )
    validation = _observe(
        setup,
        *position_grid(recipe.validation_grid, dof),
        recipe.torque_noise,
        recipe.acceleration_noise,
        rng,
    )
    return training, validation


def step_torque(setup: Setup) -> np.ndarray:
    """CC torque Aᵀτ of the constant per-element step torque."""
    amplitude = setup.config.training.step_amplitude
    return setup.ccmap.assignment.T @ np.full(setup.ccmap.n_elems, amplitude)


def step_response(
    setup: Setup,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Open-loop response of the rod to a constant torque on every element, in CC
    coordinates.

    Returns:
        (times, q, dq, ddq) sampled at the validation rate
    """
    recipe = setup.config.training
    ccmap = setup.ccmap
    tau_fem = np.full(ccmap.n_elems, recipe.step_amplitude)
    run = integrate(
        setup.plant,
        ConstantTorque(tau_fem),
        JointState.at_rest(np.zeros(ccmap.n_elems)),
        t_end=recipe.step_horizon,
        dt=recipe.simulation_dt,
        method="semi_implicit",
        label="step_response",
    )
    if run.diverged:
        raise ConfigurationError(
            "training", f"step response diverged: {run.divergence_reason}"
        )
    n_rate = int(round(recipe.step_horizon * recipe.validation_rate_hz))
    times = np.linspace(0.0, recipe.step_horizon, n_rate + 1)
    index = np.clip(np.searchsorted(run.times, times - 1e-12), 0, len(run) - 1)
    q = np.array([ccmap.reduce(run.q[i]) for i in index])
    dq = np.array([ccmap.reduce(run.dq[i]) for i in index])
    ddq = np.array(
        [
            ccmap.reduce(setup.plant.acceleration(run.q[i], run.dq[i], tau_fem))
            for i in index
        ]
    )
    return run.times[index], q, dq, ddq


def _soft_robot_sets(
    setup: Setup, rng: np.random.Generator
) -> tuple[TrainingSet, TrainingSet, ResimulationTarget]:
    recipe = setup.config.training
    times, q, dq, ddq = step_response(setup)
    tau_cc = step_torque(setup)
    noise = recipe.step_noise * abs(recipe.step_amplitude)

    wanted = np.linspace(0.0, recipe.step_horizon, recipe.step_samples)
    picks = np.unique(np.searchsorted(times, wanted - 1e-12))
    picks = np.clip(picks, 0, len(times) - 1)
    y = np.tile(tau_cc, (picks.size, 1))
    if noise > 0.0:
        y = y + rng.normal(0.0, noise, size=y.shape)
    training = TrainingSet(
        q=q[picks], dq=dq[picks], ddq=ddq[picks], y=y, torque_noise=noise
    )
    validation = TrainingSet(q=q, dq=dq, ddq=ddq, y=np.tile(tau_cc, (len(times), 1)))
    target = ResimulationTarget(
        times=times,
        q=q,
        x0=JointState.at_rest(np.zeros(setup.dof)),
        tau=tau_cc,
        method="semi_implicit",
    )
    return training, validation, target


def build_training_set(
    setup: Setup, seed: Optional[int] = None
) -> tuple[TrainingSet, TrainingSet, Optional[ResimulationTarget]]:
    """
    Noisy training and validation sets for the configured plant.

    The soft robot also returns the recorded step response used by the
    resimulation objective.
    """
    rng = np.random.default_rng(setup.config.seed if seed is None else seed)
    if setup.soft_robot:
        return _soft_robot_sets(setup, rng)
    training, validation = _two_link_sets(setup, rng)
    return training, validation, None


def initial_hyper(cfg: ExperimentConfig) -> Hyperparams:
    """Default hyperparameters for the plant with the document's overrides applied."""
    elastic = 1.0 if cfg.plant.kind == "soft_robot" else None
    data = Hyperparams.default(cfg.dof, elastic=elastic).model_dump()
    data.update(cfg.hyper.initial)
    try:
        return Hyperparams.model_validate(data)
    except ValueError as exc:
        raise ConfigurationError("hyper.initial", str(exc)) from exc


def _rmse(predicted: np.ndarray, observed: np.ndarray) -> float:
    return float(np.sqrt(np.mean((predicted - observed) ** 2)))


def prediction_frame(
    setup: Setup, model: LgpModel, validation: TrainingSet
) -> pd.DataFrame:
    """Prior and posterior torques next to the observations at the validation rows."""
    frame = validation.to_frame()
    prior = np.array(
        [
            setup.prior.components(q, dq).inverse_dynamics(ddq)
            for q, dq, ddq in zip(validation.q, validation.dq, validation.ddq)
        ]
    )
    posterior = np.array([predict_tau(model, row) for row in validation.inputs])
    for i in range(validation.dof):
        frame[f"prior_{i + 1}"] = prior[:, i]
        frame[f"posterior_{i + 1}"] = posterior[:, i]
    return frame


def fit_model(setup: Setup, optimize: bool = True) -> FitResult:
    """
    Build the data, search hyperparameters within the budget and fit the L-GP.

    Raises:
        DecompositionError: If the final Gram matrix cannot be factorized
    """
    cfg = setup.config
    training, validation, target = build_training_set(setup)
    hyper = initial_hyper(cfg)
    search = None
    if optimize and cfg.hyper.budget > 1:
        search = optimize_hyper(
            training,
            hyper,
            setup.prior,
            budget=cfg.hyper.budget,
            validation=validation,
            objective=cfg.hyper.objective,
            target=target,
            restarts=cfg.hyper.restarts,
            seed=cfg.seed,
        )
        hyper = search.hyper
    model = fit(training, hyper, setup.prior, prior_spec=setup.prior_spec)

    frame = prediction_frame(setup, model, validation)
    columns = range(1, validation.dof + 1)
    observed = frame[[f"y_{i}" for i in columns]].to_numpy()
    prior = frame[[f"prior_{i}" for i in columns]].to_numpy()
    posterior = frame[[f"posterior_{i}" for i in columns]].to_numpy()
    prior_rmse = _rmse(prior, observed)
    validation_rmse = _rmse(posterior, observed)
    logger.info(
        "harness.model_fitted",
        rows=training.size,
        validation_rows=validation.size,
        prior_rmse=prior_rmse,
        validation_rmse=validation_rmse,
    )
    return FitResult(
        model=model,
        training=training,
        validation=validation,
        search=search,
        prior_rmse=prior_rmse,
        validation_rmse=validation_rmse,
    )
