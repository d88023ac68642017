"""
CSV and metadata emission for harness results.
"""

from dataclasses import asdict, fields
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd

from services.certificates import (
    CertificateParams,
    CertificateTrace,
    RDecomposition,
    r_decomposition,
    rate_inputs,
)
from services.dynamics import Trajectory, nominal_cc_torque
from services.lgp import LgpModel
from shared.config import ExperimentConfig, get_config
from shared.schemas import RunMetadata
from shared.storage import DocumentRepository, TableRepository
from shared.utils.logging import get_logger

from .benchmark import controller_model
from .models import BenchmarkResult, MonteCarloCell, ProtocolResult, monte_carlo_frame
from .setup import Setup

logger = get_logger(__name__)

CERTIFICATE_COLUMNS = ("V", "alpha", "rho", "envelope")


def _block(
    traj: Trajectory, name: str, fallback: Optional[np.ndarray], dof: int
) -> np.ndarray:
    if name in traj.annotations:
        return np.asarray(traj.annotations[name], dtype=float).reshape(len(traj), dof)
    if fallback is not None and fallback.shape == (len(traj), dof):
        return fallback
    return np.full((len(traj), dof), np.nan)


def trajectory_frame(
    traj: Trajectory,
    trace: Optional[CertificateTrace] = None,
    dof: Optional[int] = None,
) -> pd.DataFrame:
    """
    Columns t, q_i, dq_i, e_i, de_i, tau_i, V, alpha, rho, envelope and the
    covariance extremes sigma_min, sigma_max.

    States and torques are in controller coordinates when the run carries
    annotations. Certificate columns are NaN where the trace has no sample.
    """
    if dof is None:
        notes = traj.annotations
        dof = np.asarray(notes["e"]).shape[-1] if "e" in notes else traj.dof
    count = len(traj)
    columns: dict[str, np.ndarray] = {"t": np.asarray(traj.times, dtype=float)}
    blocks = (
        ("q", traj.q),
        ("dq", traj.dq),
        ("e", None),
        ("de", None),
        ("tau", traj.tau),
    )
    for name, fallback in blocks:
        values = _block(traj, name, fallback, dof) if count else np.empty((0, dof))
        for i in range(dof):
            columns[f"{name}_{i + 1}"] = values[:, i]

    certificate = {name: np.full(count, np.nan) for name in CERTIFICATE_COLUMNS}
    if trace is not None and len(trace.times):
        index = np.clip(np.searchsorted(traj.times, trace.times - 1e-12), 0, count - 1)
        for name in CERTIFICATE_COLUMNS:
            certificate[name][index] = getattr(trace, name)
    columns.update(certificate)

    for name in ("sigma_min", "sigma_max"):
        values = traj.annotations.get(name)
        columns[name] = (
            np.asarray(values, dtype=float).reshape(count)
            if values is not None
            else np.full(count, np.nan)
        )
    return pd.DataFrame(columns)


def rate_frame(result: BenchmarkResult) -> pd.DataFrame:
    """α(t) and ρ(t) of every certified run, stacked with a controller column."""
    frames = []
    for run in result.runs:
        if run.certificate is None:
            continue
        frame = run.certificate.to_frame()
        frame.insert(0, "controller", run.name)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()


def decomposition_frame(
    setup: Setup, result: BenchmarkResult, lgp: Optional[LgpModel]
) -> pd.DataFrame:
    """λ̲(R) and its gain/damping/Coriolis lower bounds along every certified run."""
    stride = setup.config.certificate.stride
    rows = []
    for run in result.runs:
        trace = run.certificate
        if trace is None or trace.params is None:
            continue
        model = controller_model(setup, setup.spec(run.name), lgp)
        notes = run.trajectory.annotations
        for i in range(0, len(run.trajectory), stride):
            inputs = rate_inputs(
                model,
                notes["q"][i],
                notes["dq"][i],
                notes["e"][i],
                notes["de"][i],
                notes["kp"][i],
                notes["kd"][i],
                trace.params.structure_preserving,
            )
            split = r_decomposition(inputs, trace.params)
            rows.append(
                {"controller": run.name, "t": float(run.trajectory.times[i])}
                | asdict(split)
            )
    columns = ["controller", "t"] + [f.name for f in fields(RDecomposition)]
    return pd.DataFrame(rows, columns=columns)


def lyapunov_frame(result: ProtocolResult) -> pd.DataFrame:
    frames = []
    for k, trace in enumerate(result.traces):
        frame = trace.to_frame()
        frame.insert(0, "run", k)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()


def nominal_torque_frame(setup: Setup, traj: Trajectory) -> pd.DataFrame:
    """Soft-robot tracking next to the reference and the zero-error feed-forward τ*."""
    dof = setup.dof
    frame = trajectory_frame(traj, dof=dof)
    if not len(traj):
        return frame
    reference = np.array(
        [np.concatenate(setup.reference.evaluate(t)) for t in traj.times]
    )
    for i in range(dof):
        frame[f"q_d_{i + 1}"] = reference[:, i]
    if setup.ccmap is not None:
        nominal = np.array(
            [
                nominal_cc_torque(
                    setup.plant,
                    setup.ccmap,
                    row[:dof],
                    row[dof : 2 * dof],
                    row[2 * dof :],
                )
                for row in reference
            ]
        )
        for i in range(dof):
            frame[f"tau_star_{i + 1}"] = nominal[:, i]
    return frame


def params_document(params: CertificateParams) -> dict[str, Any]:
    bounds = params.bounds
    return {
        "eps": params.eps,
        "theta": params.theta,
        "alpha_lower": params.alpha_lower,
        "kappa": params.kappa,
        "phi": params.phi,
        "structure_preserving": params.structure_preserving,
        "bounds": {
            "m_lower": bounds.m_lower,
            "m_upper": bounds.m_upper,
            "damping_lower": bounds.damping_lower,
            "kp_lower": bounds.kp_lower,
            "kd_lower": bounds.kd_lower,
            "delta": bounds.delta,
            "c0": bounds.c0,
            "c1": bounds.c1,
        },
    }


class RunWriter:
    """
    Writes the artifacts of one CLI run into an output directory.

    Every table goes through a ``TableRepository``; ``finish`` writes the
    metadata document listing them.
    """

    def __init__(
        self, directory: str | Path, command: str, experiment: ExperimentConfig
    ):
        self.directory = Path(directory)
        self.tables = TableRepository(self.directory, get_config().float_format)
        self.documents = DocumentRepository(self.directory)
        self.metadata = RunMetadata(
            command=command,
            seed=experiment.seed,
            config=experiment.model_dump(mode="json"),
        )

    def table(self, name: str, frame: pd.DataFrame) -> Path:
        path = self.tables.save(frame, name)
        self.metadata.artifacts.append(path.name)
        logger.debug("harness.table_written", path=str(path), rows=len(frame))
        return path

    def document(self, name: str, document: dict[str, Any]) -> Path:
        path = self.documents.save(document, name)
        self.metadata.artifacts.append(path.name)
        return path

    def monte_carlo(self, cells: list[MonteCarloCell]) -> Path:
        return self.table("montecarlo", monte_carlo_frame(cells))

    def finish(
        self, summary: Optional[dict[str, Any]] = None, error: Any = None
    ) -> Path:
        if summary:
            self.metadata.summary.update(summary)
        if error is not None:
            self.metadata.error = error.to_dict()
        return self.documents.save(self.metadata.to_document(), "metadata")
