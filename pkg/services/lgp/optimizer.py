"""
Least-squares hyperparameter search for the L-GP.

Two objectives are supported: squared torque residuals over training and
validation data, and squared position residuals of a forward resimulation
of the posterior against a recorded trajectory.
"""

from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np
from scipy.optimize import minimize

from services.dynamics import ConstantTorque, JointState, integrate
from shared.exceptions import NumericError, ValidationError
from shared.utils.logging import get_logger

from .kernels import cross_covariance
from .models import Hyperparams, TrainingSet
from .posterior import LgpDynamics, fit
from .priors import PriorModel

logger = get_logger(__name__)

PENALTY = 1e12

Objective = Literal["torque", "resimulation"]


@dataclass(frozen=True)
class ResimulationTarget:
    """Recorded positions of an open-loop run under constant torque."""

    times: np.ndarray
    q: np.ndarray
    x0: JointState
    tau: np.ndarray
    method: Literal["rk4", "semi_implicit"] = "semi_implicit"

    def __post_init__(self) -> None:
        if len(self.times) < 2 or self.q.shape[0] != len(self.times):
            raise ValidationError(
                "resimulation target needs at least two aligned samples"
            )


@dataclass(frozen=True)
class HyperSearch:
    hyper: Hyperparams
    objective: float
    initial_objective: float
    evaluations: int


def torque_objective(
    training: TrainingSet, validation: Optional[TrainingSet], prior: PriorModel
) -> Callable[[Hyperparams], float]:
    """Sum of squared torque residuals over training and validation rows."""
    scored = training if validation is None else training.concat(validation)
    prior_torques = np.array(
        [
            prior.components(q, dq).inverse_dynamics(ddq)
            for q, dq, ddq in zip(scored.q, scored.dq, scored.ddq)
        ]
    )

    def evaluate(hyper: Hyperparams) -> float:
        try:
            model = fit(training, hyper, prior)
        except NumericError:
            return PENALTY
        correction = cross_covariance(
            scored.inputs, model.states, model.terms, model.dof
        )
        predicted = prior_torques + (correction @ model.weights).reshape(scored.y.shape)
        return float(np.sum((predicted - scored.y) ** 2))

    return evaluate


def resimulation_objective(
    training: TrainingSet, target: ResimulationTarget, prior: PriorModel
) -> Callable[[Hyperparams], float]:
    """Sum of squared position residuals of the posterior resimulation."""
    dt = float(target.times[1] - target.times[0])
    t_end = float(target.times[-1] - target.times[0])

    def evaluate(hyper: Hyperparams) -> float:
        try:
            model = fit(training, hyper, prior)
        except NumericError:
            return PENALTY
        run = integrate(
            LgpDynamics(model),
            ConstantTorque(target.tau),
            target.x0,
            t_end=t_end,
            dt=dt,
            method=target.method,
        )
        if run.diverged:
            missing = 1.0 - len(run) / len(target.times)
            return PENALTY * (1.0 + missing)
        return float(np.sum((run.q - target.q[: len(run)]) ** 2))

    return evaluate


class _Tracker:
    """Counts evaluations and remembers the best point seen."""

    def __init__(self, evaluate: Callable[[Hyperparams], float], initial: Hyperparams):
        self.evaluate = evaluate
        self.initial = initial
        self.count = 1
        self.best_hyper = initial
        self.best_vector = initial.to_log_vector()
        self.best_value = evaluate(initial)
        self.initial_value = self.best_value

    def __call__(self, vector: np.ndarray) -> float:
        self.count += 1
        try:
            hyper = self.initial.from_log_vector(vector)
        except (ValidationError, ValueError):
            return PENALTY
        value = self.evaluate(hyper)
        if not np.isfinite(value):
            value = PENALTY
        if value < self.best_value:
            self.best_value = value
            self.best_vector = np.array(vector, dtype=float)
            self.best_hyper = hyper
        return value


def optimize_hyper(
    training: TrainingSet,
    initial: Hyperparams,
    prior: PriorModel,
    budget: int = 200,
    validation: Optional[TrainingSet] = None,
    objective: Objective = "torque",
    target: Optional[ResimulationTarget] = None,
    restarts: int = 1,
    seed: int = 0,
) -> HyperSearch:
    """
    Nelder-Mead over log-hyperparameters within a fixed evaluation budget.

    The first evaluation is the initial guess, so ``budget=1`` returns it
    unchanged. Later restarts perturb the best point found so far.

    Raises:
        ValidationError: If the budget is not positive or the objective lacks its data
    """
    if budget < 1:
        raise ValidationError("budget must be at least 1", details={"budget": budget})
    if objective == "torque":
        evaluate = torque_objective(training, validation, prior)
    elif objective == "resimulation":
        if target is None:
            raise ValidationError("resimulation objective needs a target trajectory")
        evaluate = resimulation_objective(training, target, prior)
    else:
        raise ValidationError(f"unknown hyperparameter objective '{objective}'")

    tracker = _Tracker(evaluate, initial)
    rng = np.random.default_rng(seed)
    for restart in range(restarts):
        remaining = budget - tracker.count
        if remaining <= 0 or tracker.best_vector.size == 0:
            break
        start = tracker.best_vector
        if restart > 0:
            start = start + rng.normal(0.0, 0.5, size=start.size)
        minimize(
            tracker,
            start,
            method="Nelder-Mead",
            options={
                "maxfev": remaining,
                "xatol": 1e-4,
                "fatol": 1e-10,
                "adaptive": True,
            },
        )

    logger.info(
        "lgp.hyper_optimized",
        objective=objective,
        evaluations=tracker.count,
        initial=tracker.initial_value,
        best=tracker.best_value,
    )
    return HyperSearch(
        hyper=tracker.best_hyper,
        objective=tracker.best_value,
        initial_objective=tracker.initial_value,
        evaluations=tracker.count,
    )
