"""
Shared fixtures: plants, priors and a small trained L-GP.
"""

import numpy as np
import pytest

from services.dynamics import TwoLinkArm, TwoLinkParams
from services.lgp import Hyperparams, TrainingSet, TwoLinkPrior, fit
from shared.utils.logging import configure_logging


@pytest.fixture(autouse=True, scope="session")
def _quiet_logging():
    configure_logging("WARNING", "console", quiet=True)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def arm_params() -> TwoLinkParams:
    return TwoLinkParams()


@pytest.fixture
def arm(arm_params: TwoLinkParams) -> TwoLinkArm:
    return TwoLinkArm(arm_params)


@pytest.fixture
def prior_spec(arm_params: TwoLinkParams) -> TwoLinkPrior:
    return TwoLinkPrior(params=arm_params.biased([0.5, -0.5]))


@pytest.fixture
def training(arm: TwoLinkArm, rng: np.random.Generator) -> TrainingSet:
    """3x3 position grid with fixed velocity and acceleration, lightly noisy."""
    axis = np.linspace(-1.0, 1.0, 3)
    q = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
    dq = np.tile([1.0, -1.0], (q.shape[0], 1))
    ddq = np.tile([2.0, 2.0], (q.shape[0], 1))
    y = np.array([arm.inverse_dynamics(*row) for row in zip(q, dq, ddq)])
    y = y + rng.normal(0.0, 1e-3, size=y.shape)
    return TrainingSet(q=q, dq=dq, ddq=ddq, y=y, torque_noise=0.05)


@pytest.fixture
def hyper() -> Hyperparams:
    return Hyperparams.default(2)


@pytest.fixture
def lgp_model(training: TrainingSet, hyper: Hyperparams, prior_spec: TwoLinkPrior):
    return fit(training, hyper, prior_spec.build(), prior_spec=prior_spec)
