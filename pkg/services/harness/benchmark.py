"""
Tracking benchmark over the controller roster.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from services.certificates import (
    CertificateParams,
    CertifiedModel,
    WorstCaseBounds,
    certify,
    estimate_bounds,
    optimize_cert_params,
)
from services.control import ClosedLoop, ControllerSpec, Reference
from services.dynamics import JointState, Trajectory, integrate
from services.lgp import LgpModel
from shared.config import get_config
from shared.exceptions import InfeasibilityError, ValidationError
from shared.utils.logging import get_logger

from .metrics import metrics
from .models import BenchmarkResult, ControllerRun
from .setup import Setup

logger = get_logger(__name__)


def controller_model(
    setup: Setup, spec: ControllerSpec, lgp: Optional[LgpModel]
) -> CertifiedModel:
    if spec.model == "lgp":
        if lgp is None:
            raise ValidationError(f"controller '{spec.name}' needs a trained L-GP")
        return lgp
    return setup.parametric


def simulate(
    setup: Setup,
    spec: ControllerSpec,
    lgp: Optional[LgpModel],
    x0: Optional[JointState] = None,
    reference: Optional[Reference] = None,
    t_end: Optional[float] = None,
    dt: Optional[float] = None,
) -> Trajectory:
    """One closed-loop run; divergence is recorded on the trajectory."""
    integration = setup.config.integration
    loop = ClosedLoop.for_spec(
        spec,
        reference or setup.reference,
        setup.parametric,
        lgp=lgp,
        ccmap=setup.ccmap,
    )
    traj = integrate(
        setup.plant,
        loop,
        x0 if x0 is not None else setup.initial_state(),
        t_end=integration.t_end if t_end is None else t_end,
        dt=integration.dt if dt is None else dt,
        method=integration.method,
        substeps=integration.substeps,
        label=spec.name,
    )
    if traj.diverged:
        logger.warning(
            "harness.diverged",
            controller=spec.name,
            time=traj.divergence_time,
            reason=traj.divergence_reason,
        )
    return traj


def certificate_params(
    setup: Setup,
    spec: ControllerSpec,
    model: CertifiedModel,
    t_end: float,
) -> tuple[WorstCaseBounds, CertificateParams]:
    """
    Worst-case bounds over the reference tube and optimized certificate parameters.

    Raises:
        InfeasibilityError: If no parameters satisfy the conditions
    """
    cert_cfg = setup.config.certificate
    bounds = estimate_bounds(
        model,
        setup.reference,
        spec,
        cert_cfg,
        t_end,
        delta=cert_cfg.delta,
        seed=setup.config.seed,
    )
    params = optimize_cert_params(
        bounds,
        cert_cfg,
        structure_preserving=spec.structure_preserving,
        eps_reg=spec.eps_reg,
    )
    return bounds, params


def run_controller(
    setup: Setup,
    name: str,
    lgp: Optional[LgpModel],
    with_certificate: bool = False,
) -> ControllerRun:
    """Simulate a roster entry and score its steady state, optionally certified."""
    spec = setup.spec(name)
    traj = simulate(setup, spec, lgp)
    run = ControllerRun(
        name=name,
        trajectory=traj,
        metrics=metrics(traj, setup.config.integration.window_start),
    )
    if with_certificate and not traj.diverged:
        model = controller_model(setup, spec, lgp)
        try:
            t_end = setup.config.integration.t_end
            _, params = certificate_params(setup, spec, model, t_end)
        except InfeasibilityError as exc:
            run.infeasible = list(exc.violations)
        else:
            stride = setup.config.certificate.stride
            run.certificate = certify(traj, model, params, stride)
    return run


def run_benchmark(
    setup: Setup,
    lgp: Optional[LgpModel],
    names: Optional[list[str]] = None,
    with_certificate: bool = False,
) -> BenchmarkResult:
    """
    Run every requested controller of the roster.

    Runs are independent and fan out over a thread pool; results keep the
    roster order.
    """
    names = names or [entry.name for entry in setup.config.controllers]
    workers = min(get_config().max_workers, len(names))

    def job(name: str) -> ControllerRun:
        return run_controller(setup, name, lgp, with_certificate)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(job, names))
    else:
        runs = [job(name) for name in names]

    for run in runs:
        logger.info(
            "harness.controller_scored",
            controller=run.name,
            err_l2=run.metrics.err_l2,
            tau_l2=run.metrics.tau_l2,
            diverged=run.metrics.diverged,
        )
    return BenchmarkResult(runs=runs)
