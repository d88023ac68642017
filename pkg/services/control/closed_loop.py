"""
Closed-loop wiring of a control law, its model and the plant interface.
"""

from typing import Any, Callable, Optional

import numpy as np

from services.dynamics import (
    CcMap,
    ElComponents,
    JointState,
    LagrangianModel,
    cc_reduce,
    forward_dynamics,
)
from services.lgp import CovarianceQuery, LgpModel, predict_cov
from shared.exceptions import ValidationError
from shared.numerics import SymMatrix

from .controllers import (
    ControlModel,
    TrackingError,
    controller_gains,
    feedforward,
    nat_law,
)
from .models import ControllerSpec, Reference
from .primitives import gain_derivative

CovarianceFn = Callable[[np.ndarray, np.ndarray, np.ndarray], SymMatrix]


def lgp_covariance(model: LgpModel) -> CovarianceFn:
    def covariance(q: np.ndarray, dq: np.ndarray, ddq: np.ndarray) -> SymMatrix:
        return predict_cov(model, CovarianceQuery(q=q, dq=dq, ddq=ddq))

    return covariance


class ClosedLoop:
    """
    Stateful controller queried by the integrator once per step.

    Owns the only mutable state of a run: the previous torque, used to
    estimate q̈ for the covariance query, and the previous Σ_τ, used for
    the backward-difference rate Σ̇_τ. For the soft robot the FEM state is
    reduced to CC coordinates on the way in and the CC torque spread over
    the joints on the way out.
    """

    def __init__(
        self,
        spec: ControllerSpec,
        model: ControlModel,
        ref: Reference,
        covariance: Optional[CovarianceFn] = None,
        ccmap: Optional[CcMap] = None,
    ):
        if model.dof != spec.dof or ref.dof != spec.dof:
            raise ValidationError(
                "controller, model and reference disagree on dof",
                details={"spec": spec.dof, "model": model.dof, "reference": ref.dof},
            )
        if ccmap is not None and ccmap.n_segments != spec.dof:
            raise ValidationError("CC map and controller disagree on dof")
        if spec.kind == "var_nat_pdp" and covariance is None:
            raise ValidationError(f"controller '{spec.name}' needs a torque covariance")
        self.spec = spec
        self.model = model
        self.ref = ref
        self.covariance = covariance
        self.ccmap = ccmap
        self.reset()

    @classmethod
    def for_spec(
        cls,
        spec: ControllerSpec,
        ref: Reference,
        parametric: ControlModel,
        lgp: Optional[LgpModel] = None,
        ccmap: Optional[CcMap] = None,
    ) -> "ClosedLoop":
        """Pick the model named by ``spec`` and the L-GP covariance when one exists."""
        if spec.model == "lgp" and lgp is None:
            raise ValidationError(f"controller '{spec.name}' needs a trained L-GP")
        model: ControlModel = lgp if spec.model == "lgp" else parametric
        covariance = lgp_covariance(lgp) if lgp is not None else None
        return cls(spec, model, ref, covariance=covariance, ccmap=ccmap)

    def reset(self) -> None:
        self._previous_tau: Optional[np.ndarray] = None
        self._previous_sigma: Optional[np.ndarray] = None
        self._previous_t: Optional[float] = None
        self._note: dict[str, Any] = {}

    def _measure(self, q: np.ndarray, dq: np.ndarray) -> JointState:
        state = JointState(q=q, dq=dq)
        return state if self.ccmap is None else cc_reduce(self.ccmap, state)

    def _sigma(
        self, state: JointState, c: ElComponents, error: TrackingError
    ) -> np.ndarray:
        if self._previous_tau is None:
            ddq_hat = error.ddq_d
        else:
            ddq_hat = forward_dynamics(c, self._previous_tau)
        return self.covariance(state.q, state.dq, ddq_hat).entries

    def torque(self, t: float, q: np.ndarray, dq: np.ndarray) -> np.ndarray:
        state = self._measure(q, dq)
        error = TrackingError.of(self.ref, t, state)
        c = self.model.components(state.q, state.dq)
        dof = self.spec.dof

        sigma = None
        kdot = np.zeros((dof, dof))
        if self.spec.kind == "var_nat_pdp":
            sigma = self._sigma(state, c, error)
            if self._previous_sigma is not None and t > self._previous_t:
                rate = (sigma - self._previous_sigma) / (t - self._previous_t)
                kdot = gain_derivative(self.spec.adaptation, sigma, rate)

        kp, kd = controller_gains(self.spec, sigma)
        if self.spec.kind == "pdp":
            tau = feedforward(c, error) + c.g + c.d - kp @ error.e - kd @ error.de
        else:
            tau = nat_law(self.model, c, error, kp, kd, self.spec.eps_reg)

        self._previous_tau = tau
        if sigma is not None:
            self._previous_sigma, self._previous_t = sigma, t

        if sigma is None:
            sigma_min = sigma_max = np.nan
        else:
            eigenvalues = np.linalg.eigvalsh(sigma)
            sigma_min, sigma_max = float(eigenvalues[0]), float(eigenvalues[-1])
        self._note = {
            "q": state.q,
            "dq": state.dq,
            "e": error.e,
            "de": error.de,
            "tau": tau,
            "sigma_min": sigma_min,
            "sigma_max": sigma_max,
            "kp": kp,
            "kd": kd,
            "kdot": kdot,
        }
        return tau if self.ccmap is None else self.ccmap.actuate(tau)

    def annotation(self) -> dict[str, Any]:
        """Values computed by the latest ``torque`` call, in controller coordinates."""
        return dict(self._note)


def closed_loop_rhs(
    plant: LagrangianModel,
    spec: ControllerSpec,
    ref: Reference,
    model: Optional[ControlModel] = None,
    lgp: Optional[LgpModel] = None,
    ccmap: Optional[CcMap] = None,
) -> Callable[[float, np.ndarray], np.ndarray]:
    """
    State derivative f(t, x) of the plant under the controller ``spec``.

    The controller runs on ``model`` when given and on the plant itself
    otherwise; L-GP entries use ``lgp``. Every call queries the controller,
    so stateful controllers advance their caches; use it for one evaluation
    per time instant.
    """
    controller = ClosedLoop.for_spec(
        spec, ref, plant if model is None else model, lgp=lgp, ccmap=ccmap
    )

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = plant.dof
        if x.shape != (2 * n,):
            raise ValidationError(f"state must have {2 * n} entries")
        q, dq = x[:n], x[n:]
        tau = controller.torque(t, q, dq)
        return np.concatenate([dq, plant.acceleration(q, dq, tau)])

    return rhs
