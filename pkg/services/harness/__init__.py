"""
Experiment orchestration: training data, benchmarks, Monte Carlo sweeps and export.
"""

from .benchmark import (
    certificate_params,
    controller_model,
    run_benchmark,
    run_controller,
    simulate,
)
from .export import (
    RunWriter,
    decomposition_frame,
    lyapunov_frame,
    nominal_torque_frame,
    params_document,
    rate_frame,
    trajectory_frame,
)
from .metrics import l2_norm, metrics
from .models import (
    BenchmarkResult,
    ControllerRun,
    FitResult,
    MetricsRow,
    MonteCarloCell,
    ProtocolResult,
    metrics_frame,
    monte_carlo_frame,
)
from .montecarlo import divergence_onset, initial_conditions, monte_carlo
from .protocol import TWO_LINK_ANCHOR, anchor_report, protocol_states, run_protocol
from .setup import Setup, build_setup, sine_reference
from .training import (
    build_training_set,
    fit_model,
    initial_hyper,
    position_grid,
    prediction_frame,
    step_response,
)

__all__ = [
    "Setup",
    "build_setup",
    "sine_reference",
    "build_training_set",
    "position_grid",
    "step_response",
    "initial_hyper",
    "fit_model",
    "prediction_frame",
    "metrics",
    "l2_norm",
    "MetricsRow",
    "FitResult",
    "ControllerRun",
    "BenchmarkResult",
    "MonteCarloCell",
    "ProtocolResult",
    "metrics_frame",
    "monte_carlo_frame",
    "simulate",
    "controller_model",
    "certificate_params",
    "run_controller",
    "run_benchmark",
    "monte_carlo",
    "initial_conditions",
    "divergence_onset",
    "run_protocol",
    "anchor_report",
    "TWO_LINK_ANCHOR",
    "protocol_states",
    "RunWriter",
    "decomposition_frame",
    "trajectory_frame",
    "rate_frame",
    "lyapunov_frame",
    "nominal_torque_frame",
    "params_document",
]
