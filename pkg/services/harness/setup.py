"""
Plant, prior and reference of an experiment document.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from services.control import ControllerSpec, SineReference
from services.dynamics import (
    CcMap,
    FemRod,
    FemRodParams,
    JointState,
    LagrangianModel,
    TwoLinkArm,
    TwoLinkParams,
    cc_embed,
)
from services.lgp import (
    PriorModel,
    PriorSpec,
    ReducedChainPrior,
    TwoLinkPrior,
    ZeroPrior,
)
from shared.config import ExperimentConfig
from shared.exceptions import ConfigurationError


@dataclass
class Setup:
    """
    Everything an experiment needs besides the trained L-GP.

    ``prior`` is the erroneous parametric model used both as L-GP prior mean
    and by the parametric controllers. For the soft robot the controllers
    work in CC coordinates and ``ccmap`` links them to the FEM plant.
    """

    config: ExperimentConfig
    plant: LagrangianModel
    prior_spec: PriorSpec
    prior: PriorModel
    parametric: PriorModel
    reference: SineReference
    ccmap: Optional[CcMap] = None

    @property
    def dof(self) -> int:
        return self.reference.dof

    @property
    def soft_robot(self) -> bool:
        return self.ccmap is not None

    def spec(self, name: str) -> ControllerSpec:
        return ControllerSpec.from_entry(self.config.controller(name), self.dof)

    def with_reference(self, reference: SineReference) -> "Setup":
        return Setup(
            config=self.config,
            plant=self.plant,
            prior_spec=self.prior_spec,
            prior=self.prior,
            parametric=self.parametric,
            reference=reference,
            ccmap=self.ccmap,
        )

    def plant_state(self, q: np.ndarray, dq: np.ndarray) -> JointState:
        """Plant state for controller coordinates (q, q̇)."""
        state = JointState(q=np.asarray(q, dtype=float), dq=np.asarray(dq, dtype=float))
        return state if self.ccmap is None else cc_embed(self.ccmap, state)

    def initial_state(self) -> JointState:
        """Configured initial state, or the reference at t = 0."""
        q_d, dq_d, _ = self.reference.evaluate(0.0)
        ref_cfg = self.config.reference
        q0, dq0 = q_d, dq_d
        if ref_cfg.initial_q is not None:
            q0 = np.asarray(ref_cfg.initial_q, dtype=float)
        if ref_cfg.initial_dq is not None:
            dq0 = np.asarray(ref_cfg.initial_dq, dtype=float)
        if q0.shape != (self.dof,) or dq0.shape != (self.dof,):
            raise ConfigurationError(
                "reference", f"initial state needs {self.dof} entries"
            )
        return self.plant_state(q0, dq0)


def _reference(cfg: ExperimentConfig, omega: Optional[float] = None) -> SineReference:
    amplitude = np.asarray(cfg.reference.amplitude, dtype=float)
    if amplitude.shape != (cfg.dof,):
        raise ConfigurationError(
            "reference.amplitude", f"needs {cfg.dof} entries, got {amplitude.size}"
        )
    return SineReference(amplitude, cfg.reference.omega if omega is None else omega)


def build_setup(cfg: ExperimentConfig) -> Setup:
    """
    Instantiate the plant, the prior and the reference.

    Raises:
        ConfigurationError: If the document is inconsistent with the plant
    """
    plant_cfg = cfg.plant
    ccmap = None
    if plant_cfg.kind == "two_link":
        link = plant_cfg.two_link
        params = TwoLinkParams(
            masses=link.masses,
            lengths=link.lengths,
            gravity=link.gravity,
            damping_linear=link.damping_linear,
            damping_quadratic=link.damping_quadratic,
        )
        plant: LagrangianModel = TwoLinkArm(params)
        parametric_spec: PriorSpec = TwoLinkPrior(params=params.biased(link.prior_bias))
    else:
        soft = plant_cfg.soft_robot
        rod = FemRodParams(
            n_elems=soft.n_elems,
            total_mass=soft.total_mass,
            total_length=soft.total_length,
            inertia=soft.inertia,
            stiffness=soft.stiffness,
            damping=soft.damping,
            gravity=soft.gravity,
            gravity_aligned=soft.gravity_aligned,
        )
        plant = FemRod(rod)
        ccmap = CcMap(n_segments=soft.n_segments, n_elems=soft.n_elems)
        parametric_spec = ReducedChainPrior(
            rod=rod,
            n_segments=soft.n_segments,
            links_per_segment=soft.links_per_segment,
            chi=soft.prior_bias,
        )

    parametric = parametric_spec.build()
    prior_spec: PriorSpec = parametric_spec
    prior = parametric
    if plant_cfg.prior == "zero":
        prior_spec = ZeroPrior(dof=cfg.dof)
        prior = prior_spec.build()
    return Setup(
        config=cfg,
        plant=plant,
        prior_spec=prior_spec,
        prior=prior,
        parametric=parametric,
        reference=_reference(cfg),
        ccmap=ccmap,
    )


def sine_reference(cfg: ExperimentConfig, omega: float) -> SineReference:
    return _reference(cfg, omega)
