"""
Domain types of the control package.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from shared.config import AdaptationConfig, ControllerEntry
from shared.exceptions import ValidationError
from shared.numerics import eig_extremes
from shared.utils.validators import validators

ControllerKind = Literal["pdp", "nat_pdp", "var_nat_pdp"]
ModelSource = Literal["parametric", "lgp"]

_FD_STEP = 1e-5
_FD_TOL = 1e-6


class Reference(ABC):
    """Desired trajectory q_d(t) with its first two derivatives."""

    @property
    @abstractmethod
    def dof(self) -> int: ...

    @abstractmethod
    def evaluate(self, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (q_d, q̇_d, q̈_d) at time t."""

    def check_consistency(self, times: tuple[float, ...] = (0.3, 1.7, 4.1)) -> None:
        """
        Spot-check the derivatives by central differences.

        Raises:
            ValidationError: If a derivative disagrees by more than 1e-6
        """
        for t in times:
            q_minus, dq_minus, _ = self.evaluate(t - _FD_STEP)
            q_plus, dq_plus, _ = self.evaluate(t + _FD_STEP)
            _, dq, ddq = self.evaluate(t)
            for name, numeric, analytic in (
                ("velocity", (q_plus - q_minus) / (2 * _FD_STEP), dq),
                ("acceleration", (dq_plus - dq_minus) / (2 * _FD_STEP), ddq),
            ):
                error = float(np.max(np.abs(numeric - analytic)))
                if error > _FD_TOL * (1.0 + float(np.max(np.abs(analytic)))):
                    raise ValidationError(
                        f"reference {name} inconsistent at t={t}",
                        details={"error": error},
                    )


class SineReference(Reference):
    """q_d(t) = a ∘ sin(ωt)."""

    def __init__(self, amplitude: np.ndarray, omega: float = 1.0):
        self.amplitude = validators.validate_vector(amplitude, "amplitude")
        self.omega = validators.validate_positive(omega, "omega")
        self.check_consistency()

    @property
    def dof(self) -> int:
        return self.amplitude.shape[0]

    def evaluate(self, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        w = self.omega
        s, c = np.sin(w * t), np.cos(w * t)
        a = self.amplitude
        return a * s, a * (w * c), -a * (w * w * s)


def _spd(matrix: np.ndarray, name: str) -> np.ndarray:
    matrix = validators.validate_symmetric(matrix, name)
    if eig_extremes(matrix)[0] <= 0.0:
        raise ValidationError(f"{name} must be positive definite")
    return matrix


@dataclass(frozen=True)
class GainAdaptation:
    """Matrices of the variance-adaptive gain and their spectral bounds."""

    k1: np.ndarray
    k2: np.ndarray
    k3: np.ndarray
    bounds: dict[str, tuple[float, float]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        extremes = {}
        for name in ("k1", "k2", "k3"):
            matrix = _spd(np.asarray(getattr(self, name), dtype=float), name.upper())
            object.__setattr__(self, name, matrix)
            extremes[name] = eig_extremes(matrix)
        object.__setattr__(self, "bounds", extremes)

    @property
    def dof(self) -> int:
        return self.k1.shape[0]

    @classmethod
    def scalar(cls, dof: int, k1: float, k2: float, k3: float) -> "GainAdaptation":
        eye = np.eye(dof)
        return cls(k1=k1 * eye, k2=k2 * eye, k3=k3 * eye)

    @classmethod
    def from_config(cls, dof: int, cfg: AdaptationConfig) -> "GainAdaptation":
        return cls.scalar(dof, cfg.k1, cfg.k2, cfg.k3)


@dataclass(frozen=True)
class ControllerSpec:
    """Which law runs, on which model, with which gains."""

    name: str
    kind: ControllerKind
    model: ModelSource
    kp: np.ndarray
    kd: np.ndarray
    adaptation: Optional[GainAdaptation] = None
    eps_reg: float = 1e-3

    def __post_init__(self) -> None:
        object.__setattr__(self, "kp", _spd(np.asarray(self.kp, dtype=float), "K_P"))
        object.__setattr__(self, "kd", _spd(np.asarray(self.kd, dtype=float), "K_D"))
        validators.validate_positive(self.eps_reg, "eps_reg")
        validators.validate_enum(self.kind, "kind", ["pdp", "nat_pdp", "var_nat_pdp"])
        if self.kind == "var_nat_pdp" and self.adaptation is None:
            raise ValidationError("var_nat_pdp needs a gain adaptation")

    @property
    def dof(self) -> int:
        return self.kp.shape[0]

    @property
    def structure_preserving(self) -> bool:
        return self.kind != "pdp"

    @classmethod
    def from_entry(cls, entry: ControllerEntry, dof: int) -> "ControllerSpec":
        eye = np.eye(dof)
        adaptation = None
        if entry.kind == "var_nat_pdp" and entry.adaptation is not None:
            adaptation = GainAdaptation.from_config(dof, entry.adaptation)
        return cls(
            name=entry.name,
            kind=entry.kind,
            model=entry.model,
            kp=entry.kp * eye,
            kd=entry.kd * eye,
            adaptation=adaptation,
            eps_reg=entry.eps_reg,
        )
