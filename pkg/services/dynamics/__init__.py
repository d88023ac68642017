"""
Ground-truth plants, constant-curvature reduction and integration.
"""

from .cc import (
    CcMap,
    EmbeddedModel,
    ReducedChainModel,
    cc_actuate,
    cc_embed,
    cc_reduce,
    nominal_cc_torque,
)
from .integrator import ConstantTorque, Controller, integrate
from .models import (
    ElComponents,
    Energies,
    FemRodParams,
    JointState,
    Trajectory,
    TwoLinkParams,
)
from .plants import (
    FemRod,
    LagrangianModel,
    LinkChain,
    TwoLinkArm,
    UnitMassPlant,
    ZeroModel,
    christoffel,
    fem_rod_components,
    forward_dynamics,
    two_link_components,
)

__all__ = [
    "JointState",
    "ElComponents",
    "Energies",
    "TwoLinkParams",
    "FemRodParams",
    "Trajectory",
    "LagrangianModel",
    "TwoLinkArm",
    "LinkChain",
    "FemRod",
    "UnitMassPlant",
    "ZeroModel",
    "christoffel",
    "forward_dynamics",
    "two_link_components",
    "fem_rod_components",
    "CcMap",
    "EmbeddedModel",
    "ReducedChainModel",
    "cc_reduce",
    "cc_embed",
    "cc_actuate",
    "nominal_cc_torque",
    "Controller",
    "ConstantTorque",
    "integrate",
]
