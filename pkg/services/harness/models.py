"""
Result types of the experiment harness.
"""

from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np
import pandas as pd

from services.certificates import CertificateParams, CertificateTrace, WorstCaseBounds
from services.dynamics import Trajectory
from services.lgp import HyperSearch, LgpModel, TrainingSet


@dataclass(frozen=True)
class MetricsRow:
    """Steady-state performance of one controller run."""

    controller: str
    tau_l2: float
    tau_max: float
    tau_mean: float
    err_l2: float
    e_max: float
    de_max: float
    e_mean: float
    de_mean: float
    samples: int
    diverged: bool = False

    @classmethod
    def diverged_row(cls, controller: str) -> "MetricsRow":
        nan = float("nan")
        return cls(controller, nan, nan, nan, nan, nan, nan, nan, nan, 0, diverged=True)

    @property
    def error_rows(self) -> tuple[float, float, float, float]:
        """The four error metrics compared across controllers."""
        return self.err_l2, self.e_max, self.de_max, self.e_mean


def metrics_frame(rows: list[MetricsRow]) -> pd.DataFrame:
    columns = [f.name for f in fields(MetricsRow)]
    return pd.DataFrame([asdict(row) for row in rows], columns=columns)


@dataclass
class FitResult:
    model: LgpModel
    training: TrainingSet
    validation: TrainingSet
    search: Optional[HyperSearch]
    prior_rmse: float
    validation_rmse: float


@dataclass
class ControllerRun:
    """One benchmark run, optionally certified."""

    name: str
    trajectory: Trajectory
    metrics: MetricsRow
    certificate: Optional[CertificateTrace] = None
    infeasible: list[str] = field(default_factory=list)


@dataclass
class BenchmarkResult:
    runs: list[ControllerRun]

    @property
    def rows(self) -> list[MetricsRow]:
        return [run.metrics for run in self.runs]

    def run(self, name: str) -> ControllerRun:
        for run in self.runs:
            if run.name == name:
                return run
        raise KeyError(name)


@dataclass(frozen=True)
class MonteCarloCell:
    """Statistics of all realizations for one (ω, controller) pair."""

    omega: float
    controller: str
    realizations: int
    diverged: int
    converged: int
    err_l2_mean: float
    err_l2_std: float
    tau_l2_mean: float
    tau_l2_std: float

    @classmethod
    def from_runs(
        cls, omega: float, controller: str, rows: list[MetricsRow]
    ) -> "MonteCarloCell":
        stable = [row for row in rows if not row.diverged]
        err = np.array([row.err_l2 for row in stable])
        tau = np.array([row.tau_l2 for row in stable])

        def stats(values: np.ndarray) -> tuple[float, float]:
            if values.size == 0:
                return float("nan"), float("nan")
            return float(np.mean(values)), float(np.std(values))

        err_mean, err_std = stats(err)
        tau_mean, tau_std = stats(tau)
        return cls(
            omega=omega,
            controller=controller,
            realizations=len(rows),
            diverged=len(rows) - len(stable),
            converged=len(stable),
            err_l2_mean=err_mean,
            err_l2_std=err_std,
            tau_l2_mean=tau_mean,
            tau_l2_std=tau_std,
        )


def monte_carlo_frame(cells: list[MonteCarloCell]) -> pd.DataFrame:
    columns = [f.name for f in fields(MonteCarloCell)]
    return pd.DataFrame([asdict(cell) for cell in cells], columns=columns)


@dataclass
class ProtocolResult:
    """Certified runs from random initial conditions."""

    params: CertificateParams
    bounds: WorstCaseBounds
    traces: list[CertificateTrace]
    initial_states: np.ndarray

    @property
    def violations(self) -> int:
        return sum(trace.violations for trace in self.traces)

    @property
    def void_samples(self) -> int:
        return sum(trace.void_samples for trace in self.traces)
