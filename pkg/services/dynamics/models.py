"""
Domain types of the dynamics package.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from shared.exceptions import ValidationError
from shared.numerics import SymMatrix
from shared.utils.validators import validators


@dataclass(frozen=True)
class JointState:
    """Generalized coordinates and velocities."""

    q: np.ndarray
    dq: np.ndarray

    def __post_init__(self) -> None:
        q = validators.validate_vector(self.q, "q")
        dq = validators.validate_vector(self.dq, "dq", dim=q.shape[0])
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "dq", dq)

    @property
    def dof(self) -> int:
        return self.q.shape[0]

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.dq])

    @classmethod
    def from_vector(cls, x: np.ndarray) -> "JointState":
        half = np.asarray(x).shape[0] // 2
        return cls(q=x[:half], dq=x[half:])

    @classmethod
    def at_rest(cls, q: np.ndarray) -> "JointState":
        q = np.asarray(q, dtype=float)
        return cls(q=q, dq=np.zeros_like(q))


@dataclass(frozen=True)
class ElComponents:
    """
    Euler-Lagrange terms evaluated at one state.

    ``d`` is the dissipative force D(q̇)q̇; ``damping`` the matrix D(q̇) itself
    and ``mass_derivative[k]`` the partial ∂M/∂q_k when the provider has it.
    """

    M: np.ndarray
    C: np.ndarray
    g: np.ndarray
    d: np.ndarray
    dq: np.ndarray
    damping: Optional[np.ndarray] = None
    mass_derivative: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def dof(self) -> int:
        return self.g.shape[0]

    @property
    def mass(self) -> SymMatrix:
        return SymMatrix(self.M)

    @property
    def bias(self) -> np.ndarray:
        """C(q, q̇)q̇ + g(q) + d(q̇)."""
        return self.C @ self.dq + self.g + self.d

    def inverse_dynamics(self, ddq: np.ndarray) -> np.ndarray:
        return self.M @ ddq + self.bias


@dataclass(frozen=True)
class Energies:
    kinetic: float
    potential: float

    @property
    def total(self) -> float:
        return self.kinetic + self.potential


class TwoLinkParams(BaseModel):
    """Planar two-link arm with uniform slender links."""

    model_config = ConfigDict(frozen=True)

    masses: list[float] = Field(default_factory=lambda: [1.0, 1.0])
    lengths: list[float] = Field(default_factory=lambda: [1.0, 1.0])
    gravity: float = 10.0
    damping_linear: float = 1.0
    damping_quadratic: float = 1.0

    @field_validator("masses", "lengths")
    @classmethod
    def validate_pair(cls, value: list[float]) -> list[float]:
        if len(value) != 2:
            raise ValueError("exactly two entries required")
        if any(v <= 0.0 for v in value):
            raise ValueError("entries must be positive")
        return value

    @field_validator("gravity", "damping_linear", "damping_quadratic")
    @classmethod
    def validate_non_negative(cls, value: float) -> float:
        if value < 0.0:
            raise ValueError("must be non-negative")
        return value

    def biased(self, chi: list[float]) -> "TwoLinkParams":
        """
        Erroneous estimate with relative bias χ per link.

        Masses and lengths scale with (1+χ_n); the n-th damper coefficient
        (linear for n=1, quadratic for n=2) scales with (1−χ_n).
        """
        if len(chi) != 2:
            raise ValidationError("prior bias needs two entries")
        return TwoLinkParams(
            masses=[(1.0 + c) * m for c, m in zip(chi, self.masses)],
            lengths=[(1.0 + c) * l for c, l in zip(chi, self.lengths)],
            gravity=self.gravity,
            damping_linear=(1.0 - chi[0]) * self.damping_linear,
            damping_quadratic=(1.0 - chi[1]) * self.damping_quadratic,
        )

    def undamped(self) -> "TwoLinkParams":
        return self.model_copy(update={"damping_linear": 0.0, "damping_quadratic": 0.0})


class FemRodParams(BaseModel):
    """Planar rod discretized into rigid elements joined by spring-damper joints."""

    model_config = ConfigDict(frozen=True)

    n_elems: int = Field(default=100, ge=2)
    total_mass: float = Field(default=1.0, gt=0.0)
    total_length: float = Field(default=1.0, gt=0.0)
    inertia: Optional[float] = Field(default=None, gt=0.0)
    stiffness: float = Field(default=10.0, ge=0.0)
    damping: float = Field(default=5.0, ge=0.0)
    gravity: float = Field(default=9.81, ge=0.0)
    gravity_aligned: bool = True

    @property
    def element_mass(self) -> float:
        return self.total_mass / self.n_elems

    @property
    def element_length(self) -> float:
        return self.total_length / self.n_elems

    @property
    def element_inertia(self) -> float:
        """Lumped rotational inertia; m·L²/(12·n³) unless set explicitly."""
        if self.inertia is not None:
            return self.inertia
        return self.total_mass * self.total_length**2 / (12.0 * self.n_elems**3)


@dataclass
class Trajectory:
    """Uniformly sampled closed-loop run."""

    times: np.ndarray
    q: np.ndarray
    dq: np.ndarray
    tau: np.ndarray
    annotations: dict[str, np.ndarray] = field(default_factory=dict)
    diverged: bool = False
    divergence_time: Optional[float] = None
    divergence_reason: Optional[str] = None
    label: str = ""

    def __post_init__(self) -> None:
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0.0):
            raise ValidationError("trajectory times must be strictly increasing")
        if not (len(self.times) == len(self.q) == len(self.dq) == len(self.tau)):
            raise ValidationError("trajectory columns have different lengths")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def dof(self) -> int:
        return self.q.shape[1] if self.q.ndim == 2 and self.q.shape[0] else 0

    @property
    def dt(self) -> float:
        if len(self.times) < 2:
            return 0.0
        return float(self.times[1] - self.times[0])

    def state(self, index: int) -> JointState:
        return JointState(q=self.q[index], dq=self.dq[index])

    def window(self, t_start: float) -> np.ndarray:
        """Indices of samples with t ≥ t_start."""
        return np.flatnonzero(self.times >= t_start - 1e-12)

    def annotation(self, name: str) -> np.ndarray:
        if name not in self.annotations:
            raise ValidationError(f"trajectory has no annotation '{name}'")
        return self.annotations[name]
