"""
PD+, nat-PD+ and var-nat-PD+ tracking controllers.
"""

from .closed_loop import ClosedLoop, CovarianceFn, closed_loop_rhs, lgp_covariance
from .controllers import (
    ControlModel,
    TrackingError,
    controller_gains,
    feedforward,
    nat_law,
    nat_pdp_torque,
    pdp_torque,
)
from .models import ControllerSpec, GainAdaptation, Reference, SineReference
from .primitives import adaptive_gain, design_k3, gain_derivative, heaviside, projector

__all__ = [
    "Reference",
    "SineReference",
    "GainAdaptation",
    "ControllerSpec",
    "heaviside",
    "projector",
    "adaptive_gain",
    "gain_derivative",
    "design_k3",
    "ControlModel",
    "TrackingError",
    "feedforward",
    "nat_law",
    "controller_gains",
    "pdp_torque",
    "nat_pdp_torque",
    "ClosedLoop",
    "CovarianceFn",
    "lgp_covariance",
    "closed_loop_rhs",
]
