"""
Certified runs from random initial conditions around the reference.
"""

from typing import Optional

import numpy as np

from services.certificates import certify, feasibility
from services.lgp import LgpModel
from shared.utils.logging import get_logger

from .benchmark import certificate_params, controller_model, simulate
from .models import ProtocolResult
from .setup import Setup

logger = get_logger(__name__)


def protocol_states(setup: Setup, runs: Optional[int] = None) -> np.ndarray:
    """
    Rows (q₀, q̇₀) with q₀ ~ N(0, σ²I) and q̇₀ ~ N(π/2·1, σ²I).
    """
    cert = setup.config.certificate
    runs = cert.protocol_runs if runs is None else runs
    rng = np.random.default_rng(setup.config.seed)
    dof = setup.dof
    q0 = rng.normal(0.0, cert.protocol_sigma, size=(runs, dof))
    dq0 = rng.normal(0.5 * np.pi, cert.protocol_sigma, size=(runs, dof))
    return np.hstack([q0, dq0])


def run_protocol(
    setup: Setup,
    lgp: Optional[LgpModel],
    controller: Optional[str] = None,
    runs: Optional[int] = None,
) -> ProtocolResult:
    """
    Simulate and certify ``runs`` closed loops of one controller.

    The certificate parameters are optimized once against bounds sampled
    over the reference tube and shared by all runs.

    Raises:
        InfeasibilityError: If no certificate parameters exist
    """
    cert = setup.config.certificate
    name = controller or cert.controller
    spec = setup.spec(name)
    model = controller_model(setup, spec, lgp)
    bounds, params = certificate_params(setup, spec, model, cert.protocol_t_end)

    states = protocol_states(setup, runs)
    dof = setup.dof
    traces = []
    for k, state in enumerate(states):
        traj = simulate(
            setup,
            spec,
            lgp,
            x0=setup.plant_state(state[:dof], state[dof:]),
            t_end=cert.protocol_t_end,
        )
        traj.label = f"{name}#{k}"
        traces.append(certify(traj, model, params, cert.stride))

    result = ProtocolResult(
        params=params, bounds=bounds, traces=traces, initial_states=states
    )
    logger.info(
        "harness.protocol_finished",
        controller=name,
        runs=len(traces),
        violations=result.violations,
        void=result.void_samples,
    )
    return result


# reference (ε, ϑ, α̲) for the two-link benchmark
TWO_LINK_ANCHOR = (1.1012, 1.4211, 0.1056)


def anchor_report(result: ProtocolResult) -> dict:
    """Feasibility of the reference two-link tuple against our sampled bounds."""
    eps, theta, alpha = TWO_LINK_ANCHOR
    report = feasibility(eps, theta, alpha, result.bounds)
    return {
        "eps": eps,
        "theta": theta,
        "alpha_lower": alpha,
        "feasible": report.ok,
        "violations": list(report.violations),
        "optimized": {
            "eps": result.params.eps,
            "theta": result.params.theta,
            "alpha_lower": result.params.alpha_lower,
        },
    }
