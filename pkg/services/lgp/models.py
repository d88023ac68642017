"""
Domain types of the L-GP package.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from shared.exceptions import ValidationError
from shared.utils.validators import validators


class Hyperparams(BaseModel):
    """
    Hyperparameters of the L-GP.

    Amplitudes are standard deviations of the latent GPs. Kinetic amplitudes
    are listed per upper-triangular entry (k ≤ l) of the mass matrix in
    row-major order; every entry shares the isotropic ``kinetic_length``.
    The elastic kernel is only used for the soft robot and covers the
    diagonal entries of a configuration-dependent stiffness matrix.
    """

    model_config = ConfigDict(frozen=True)

    kinetic_amplitudes: list[float]
    kinetic_length: float = Field(default=1.0, gt=0.0)
    gravity_amplitude: float = Field(default=1.0, ge=0.0)
    gravity_lengths: list[float]
    elastic_amplitudes: list[float] = Field(default_factory=list)
    elastic_length: float = Field(default=1.0, gt=0.0)
    dissipation_amplitudes: list[float]
    dissipation_lengths: list[float]
    symmetric: bool = False

    @model_validator(mode="after")
    def check_shapes(self) -> "Hyperparams":
        n = len(self.gravity_lengths)
        if n < 1:
            raise ValueError("gravity_lengths must not be empty")
        if len(self.kinetic_amplitudes) != n * (n + 1) // 2:
            raise ValueError(f"kinetic_amplitudes needs {n * (n + 1) // 2} entries")
        if self.elastic_amplitudes and len(self.elastic_amplitudes) != n:
            raise ValueError(f"elastic_amplitudes needs {n} entries or none")
        if len(self.dissipation_amplitudes) != n or len(self.dissipation_lengths) != n:
            raise ValueError(f"dissipation parameters need {n} entries each")
        amplitudes = (
            self.kinetic_amplitudes
            + self.elastic_amplitudes
            + self.dissipation_amplitudes
            + [self.gravity_amplitude]
        )
        if any(a < 0.0 or not math.isfinite(a) for a in amplitudes):
            raise ValueError("amplitudes must be finite and non-negative")
        lengths = self.gravity_lengths + self.dissipation_lengths
        if any(ell <= 0.0 or not math.isfinite(ell) for ell in lengths):
            raise ValueError("length-scales must be finite and positive")
        return self

    @property
    def dof(self) -> int:
        return len(self.gravity_lengths)

    @classmethod
    def default(
        cls,
        dof: int,
        kinetic: float = 0.5,
        gravity: float = 5.0,
        elastic: Optional[float] = None,
        dissipation: float = 1.0,
        symmetric: bool = False,
    ) -> "Hyperparams":
        entries = dof * (dof + 1) // 2
        return cls(
            kinetic_amplitudes=[kinetic] * entries,
            kinetic_length=1.0,
            gravity_amplitude=gravity,
            gravity_lengths=[1.0] * dof,
            elastic_amplitudes=[] if elastic is None else [elastic] * dof,
            elastic_length=1.0,
            dissipation_amplitudes=[dissipation] * dof,
            dissipation_lengths=[1.0] * dof,
            symmetric=symmetric,
        )

    def _free_fields(self) -> list[tuple[str, int]]:
        """(field, index) of every positive parameter; zero amplitudes stay fixed."""
        free: list[tuple[str, int]] = []
        for name in (
            "kinetic_amplitudes",
            "gravity_lengths",
            "elastic_amplitudes",
            "dissipation_amplitudes",
            "dissipation_lengths",
        ):
            free.extend((name, i) for i, v in enumerate(getattr(self, name)) if v > 0.0)
        scalars = ["kinetic_length", "gravity_amplitude"]
        if self.elastic_amplitudes:
            scalars.append("elastic_length")
        free.extend((name, -1) for name in scalars if getattr(self, name) > 0.0)
        return free

    def to_log_vector(self) -> np.ndarray:
        values = []
        for name, index in self._free_fields():
            value = getattr(self, name)
            values.append(value if index < 0 else value[index])
        return np.log(np.asarray(values, dtype=float))

    def from_log_vector(self, vector: np.ndarray) -> "Hyperparams":
        """Copy of ``self`` with the free parameters replaced by exp(vector)."""
        free = self._free_fields()
        if len(vector) != len(free):
            raise ValidationError(
                f"expected {len(free)} log-parameters, got {len(vector)}"
            )
        data = self.model_dump()
        for (name, index), value in zip(free, np.exp(np.clip(vector, -30.0, 30.0))):
            if index < 0:
                data[name] = float(value)
            else:
                data[name][index] = float(value)
        return Hyperparams(**data)


@dataclass(frozen=True)
class TrainingSet:
    """
    Observations (q, q̇, q̈ + noise, y) with their noise levels.

    ``torque_noise`` and ``acceleration_noise`` are standard deviations.
    """

    q: np.ndarray
    dq: np.ndarray
    ddq: np.ndarray
    y: np.ndarray
    torque_noise: float = 0.0
    acceleration_noise: float = 0.0

    def __post_init__(self) -> None:
        q = np.atleast_2d(validators.validate_finite(self.q, "q"))
        for name in ("dq", "ddq", "y"):
            value = np.atleast_2d(validators.validate_finite(getattr(self, name), name))
            if value.shape != q.shape:
                raise ValidationError(
                    f"training column '{name}' has shape {value.shape}, "
                    f"expected {q.shape}"
                )
            object.__setattr__(self, name, value)
        object.__setattr__(self, "q", q)
        validators.validate_range(self.torque_noise, "torque_noise", min_value=0.0)
        validators.validate_range(
            self.acceleration_noise, "acceleration_noise", min_value=0.0
        )

    @property
    def size(self) -> int:
        return self.q.shape[0]

    @property
    def dof(self) -> int:
        return self.q.shape[1]

    @property
    def inputs(self) -> np.ndarray:
        """Rows (q, q̇, q̈)."""
        return np.hstack([self.q, self.dq, self.ddq])

    def concat(self, other: "TrainingSet") -> "TrainingSet":
        return TrainingSet(
            q=np.vstack([self.q, other.q]),
            dq=np.vstack([self.dq, other.dq]),
            ddq=np.vstack([self.ddq, other.ddq]),
            y=np.vstack([self.y, other.y]),
            torque_noise=self.torque_noise,
            acceleration_noise=self.acceleration_noise,
        )

    def with_noise(
        self, torque_noise: float, acceleration_noise: float = 0.0
    ) -> "TrainingSet":
        return TrainingSet(
            q=self.q,
            dq=self.dq,
            ddq=self.ddq,
            y=self.y,
            torque_noise=torque_noise,
            acceleration_noise=acceleration_noise,
        )

    def to_frame(self) -> pd.DataFrame:
        columns: dict[str, np.ndarray] = {}
        blocks = (("q", self.q), ("dq", self.dq), ("ddq", self.ddq), ("y", self.y))
        for prefix, block in blocks:
            for i in range(self.dof):
                columns[f"{prefix}_{i + 1}"] = block[:, i]
        return pd.DataFrame(columns)

    @classmethod
    def from_frame(
        cls,
        frame: pd.DataFrame,
        torque_noise: float = 0.0,
        acceleration_noise: float = 0.0,
    ) -> "TrainingSet":
        """
        Raises:
            ValidationError: If the q/dq/ddq/y column groups are missing or uneven
        """
        dof = sum(1 for column in frame.columns if column.startswith("q_"))
        blocks = {}
        for prefix in ("q", "dq", "ddq", "y"):
            names = [f"{prefix}_{i + 1}" for i in range(dof)]
            missing = [name for name in names if name not in frame.columns]
            if dof == 0 or missing:
                raise ValidationError(
                    "training table lacks columns",
                    details={"missing": missing or [prefix]},
                )
            blocks[prefix] = frame[names].to_numpy(dtype=float)
        return cls(
            q=blocks["q"],
            dq=blocks["dq"],
            ddq=blocks["ddq"],
            y=blocks["y"],
            torque_noise=torque_noise,
            acceleration_noise=acceleration_noise,
        )


@dataclass(frozen=True)
class CovarianceQuery:
    q: np.ndarray
    dq: np.ndarray
    ddq: np.ndarray

    def __post_init__(self) -> None:
        for name in ("q", "dq", "ddq"):
            object.__setattr__(
                self, name, validators.validate_vector(getattr(self, name), name)
            )

    @property
    def state(self) -> np.ndarray:
        return np.concatenate([self.q, self.dq, self.ddq])
