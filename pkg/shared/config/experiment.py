"""
Experiment documents: the versioned YAML files under ``configs/``.

Every section rejects unknown keys. Overrides use dotted keys
(``integration.dt=0.005``, ``controllers.0.kp=5``) whose values are parsed
as YAML scalars, so they round-trip into the echoed config.
"""

import copy
import math
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic import ValidationError as PydanticValidationError

from shared.exceptions import ConfigurationError

SCHEMA_VERSION = "1"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TwoLinkPlantConfig(_Section):
    masses: list[float] = Field(default_factory=lambda: [1.0, 1.0])
    lengths: list[float] = Field(default_factory=lambda: [1.0, 1.0])
    gravity: float = 10.0
    damping_linear: float = 1.0
    damping_quadratic: float = 1.0
    prior_bias: list[float] = Field(default_factory=lambda: [0.5, -0.5])


class SoftRobotPlantConfig(_Section):
    n_elems: int = Field(default=20, ge=2)
    n_segments: int = Field(default=4, ge=1)
    total_mass: float = 1.0
    total_length: float = 1.0
    inertia: float | None = None
    stiffness: float = 10.0
    damping: float = 5.0
    gravity: float = 9.81
    gravity_aligned: bool = True
    links_per_segment: int = Field(default=4, ge=1)
    prior_bias: list[float] = Field(default_factory=lambda: [0.25, -0.25, 0.25, -0.25])

    @model_validator(mode="after")
    def check_segments(self) -> "SoftRobotPlantConfig":
        if self.n_segments > self.n_elems:
            raise ValueError("n_segments cannot exceed n_elems")
        if len(self.prior_bias) != self.n_segments:
            raise ValueError("prior_bias needs one entry per segment")
        return self


class PlantConfig(_Section):
    kind: Literal["two_link", "soft_robot"] = "two_link"
    prior: Literal["parametric", "zero"] = "parametric"
    two_link: TwoLinkPlantConfig = Field(default_factory=TwoLinkPlantConfig)
    soft_robot: SoftRobotPlantConfig = Field(default_factory=SoftRobotPlantConfig)


class GridSpec(_Section):
    """Equidistant square grid over positions with fixed velocity and acceleration."""

    half_width: float = 1.0
    points: int = Field(default=5, ge=1)
    velocity: list[float] = Field(default_factory=lambda: [1.0, -1.0])
    acceleration: list[float] = Field(default_factory=lambda: [4.0, 4.0])


class VelocityGridSpec(_Section):
    half_width: float = 1.0
    points: int = Field(default=3, ge=1)


class TrainingConfig(_Section):
    position_grids: list[GridSpec] = Field(
        default_factory=lambda: [
            GridSpec(
                half_width=1.0, points=5, velocity=[1.0, -1.0], acceleration=[4.0, 4.0]
            ),
            GridSpec(
                half_width=1.25, points=3, velocity=[1.5, 0.0], acceleration=[0.0, 0.0]
            ),
        ]
    )
    velocity_grid: VelocityGridSpec | None = Field(default_factory=VelocityGridSpec)
    validation_grid: GridSpec = Field(
        default_factory=lambda: GridSpec(
            half_width=1.0, points=6, velocity=[1.0, -1.0], acceleration=[4.0, 4.0]
        )
    )
    torque_noise: float = Field(default=0.1, ge=0.0)
    acceleration_noise: float = Field(default=math.pi / 180.0, ge=0.0)

    # soft robot step response
    step_amplitude: float = 1.0
    step_horizon: float = 4.0
    step_samples: int = Field(default=24, ge=1)
    step_noise: float = Field(default=0.01, ge=0.0)
    validation_rate_hz: float = Field(default=50.0, gt=0.0)
    simulation_dt: float = Field(default=1e-3, gt=0.0)


class HyperConfig(_Section):
    objective: Literal["torque", "resimulation"] = "torque"
    budget: int = Field(default=200, ge=1)
    restarts: int = Field(default=1, ge=1)
    initial: dict[str, Any] = Field(default_factory=dict)


class AdaptationConfig(_Section):
    k1: float = 100.0
    k2: float = 0.02
    k3: float = 7.11


class ControllerEntry(_Section):
    name: str
    kind: Literal["pdp", "nat_pdp", "var_nat_pdp"]
    model: Literal["parametric", "lgp"]
    kp: float = Field(default=10.0, gt=0.0)
    kd: float = Field(default=10.0, gt=0.0)
    eps_reg: float = Field(default=1e-3, gt=0.0)
    adaptation: AdaptationConfig | None = None

    @model_validator(mode="after")
    def check_adaptation(self) -> "ControllerEntry":
        if self.kind == "var_nat_pdp" and self.adaptation is None:
            raise ValueError("var_nat_pdp requires an adaptation section")
        return self


def default_roster() -> list[ControllerEntry]:
    return [
        ControllerEntry(name="pdp", kind="pdp", model="parametric"),
        ControllerEntry(name="lgp_pdp", kind="pdp", model="lgp"),
        ControllerEntry(name="nat_pdp", kind="nat_pdp", model="parametric"),
        ControllerEntry(name="lgp_nat_pdp", kind="nat_pdp", model="lgp"),
        ControllerEntry(
            name="lgp_var_nat_pdp",
            kind="var_nat_pdp",
            model="lgp",
            adaptation=AdaptationConfig(),
        ),
    ]


class ReferenceConfig(_Section):
    amplitude: list[float] = Field(default_factory=lambda: [math.pi / 2, math.pi / 2])
    omega: float = Field(default=1.0, gt=0.0)
    initial_q: list[float] | None = None
    initial_dq: list[float] | None = None


class IntegrationConfig(_Section):
    dt: float = Field(default=2e-3, gt=0.0)
    t_end: float = Field(default=20.0, gt=0.0)
    method: Literal["rk4", "semi_implicit"] = "rk4"
    substeps: int = Field(default=1, ge=1)
    window_start: float = Field(default=10.0, ge=0.0)

    @model_validator(mode="after")
    def check_horizon(self) -> "IntegrationConfig":
        if self.t_end < self.dt:
            raise ValueError("t_end must be at least dt")
        return self


class SearchGrid(_Section):
    low: float
    high: float
    points: int = Field(default=8, ge=1)


class CertificateConfig(_Section):
    delta: float = Field(default=0.5269, ge=0.0)
    upsilon_floor: float = 6.0
    eps_grid: SearchGrid = Field(default_factory=lambda: SearchGrid(low=0.05, high=3.0))
    theta_grid: SearchGrid = Field(
        default_factory=lambda: SearchGrid(low=0.05, high=10.0)
    )
    alpha_grid: SearchGrid = Field(
        default_factory=lambda: SearchGrid(low=0.005, high=2.0)
    )
    refine_rounds: int = Field(default=4, ge=0)
    bound_points: int = Field(default=9, ge=2)
    tube_margin: float = Field(default=0.25, ge=0.0)
    stride: int = Field(default=1, ge=1)
    controller: str = "lgp_nat_pdp"
    protocol_runs: int = Field(default=10, ge=1)
    protocol_sigma: float = Field(default=math.pi / 3, gt=0.0)
    protocol_t_end: float = Field(default=10.0, gt=0.0)


class MonteCarloConfig(_Section):
    omegas: list[float] = Field(
        default_factory=lambda: [1.0 + 0.5 * k for k in range(9)]
    )
    realizations: int = Field(default=10, ge=1)
    ic_half_width: float = Field(default=math.pi / 4, gt=0.0)
    horizon_periods: float = Field(default=4.0, gt=2.0)
    error_threshold: float = Field(default=math.pi, gt=0.0)
    dt: float = Field(default=5e-3, gt=0.0)
    controllers: list[str] | None = None


class OutputConfig(_Section):
    directory: str = "runs/default"


class ExperimentConfig(_Section):
    """Complete description of one experiment."""

    schema_version: Literal["1"] = SCHEMA_VERSION
    name: str = "experiment"
    seed: int = 0
    full_scale: bool = False
    plant: PlantConfig = Field(default_factory=PlantConfig)
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    hyper: HyperConfig = Field(default_factory=HyperConfig)
    controllers: list[ControllerEntry] = Field(default_factory=default_roster)
    reference: ReferenceConfig = Field(default_factory=ReferenceConfig)
    integration: IntegrationConfig = Field(default_factory=IntegrationConfig)
    certificate: CertificateConfig = Field(default_factory=CertificateConfig)
    monte_carlo: MonteCarloConfig = Field(default_factory=MonteCarloConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def check_roster(self) -> "ExperimentConfig":
        names = [entry.name for entry in self.controllers]
        if len(set(names)) != len(names):
            raise ValueError("controller names must be unique")
        return self

    @property
    def dof(self) -> int:
        if self.plant.kind == "two_link":
            return 2
        return self.plant.soft_robot.n_segments

    def controller(self, name: str) -> ControllerEntry:
        for entry in self.controllers:
            if entry.name == name:
                return entry
        raise ConfigurationError("controller", f"unknown controller '{name}'")


def _set_dotted(document: dict[str, Any], key: str, value: Any) -> None:
    parts = key.split(".")
    node: Any = document
    for part in parts[:-1]:
        if isinstance(node, list):
            node = node[int(part)]
            continue
        if part not in node or node[part] is None:
            node[part] = {}
        node = node[part]
    last = parts[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value


def parse_overrides(overrides: list[str] | None) -> dict[str, Any]:
    """Split ``key=value`` strings; values are parsed as YAML scalars."""
    parsed: dict[str, Any] = {}
    for item in overrides or []:
        if "=" not in item:
            raise ConfigurationError(item, "override must look like key=value")
        key, raw = item.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigurationError(item, "override key is empty")
        parsed[key] = yaml.safe_load(raw)
    return parsed


def build_experiment(
    document: dict[str, Any], overrides: list[str] | None = None
) -> ExperimentConfig:
    document = copy.deepcopy(dict(document or {}))
    defaults: dict[str, Any] | None = None
    for key, value in parse_overrides(overrides).items():
        section = key.split(".", 1)[0]
        if "." in key and document.get(section) is None:
            if defaults is None:
                defaults = ExperimentConfig().model_dump(mode="json")
            if section in defaults:
                document[section] = defaults[section]
        try:
            _set_dotted(document, key, value)
        except (IndexError, ValueError, TypeError, KeyError) as exc:
            raise ConfigurationError(key, f"cannot apply override: {exc}") from exc
    try:
        experiment = ExperimentConfig.model_validate(document)
    except PydanticValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise ConfigurationError(location, first["msg"]) from exc
    if experiment.full_scale:
        experiment = apply_full_scale(experiment)
    return experiment


def load_experiment(
    path: str | Path, overrides: list[str] | None = None
) -> ExperimentConfig:
    """
    Read, override and validate an experiment document.

    Raises:
        ConfigurationError: Missing file, malformed YAML or invalid key
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError("config", f"file not found: {path}")
    try:
        document = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigurationError("config", f"malformed YAML in {path}: {exc}") from exc
    if not isinstance(document, dict):
        raise ConfigurationError("config", "top level must be a mapping")
    return build_experiment(document, overrides)


def dump_experiment(experiment: ExperimentConfig) -> str:
    return yaml.safe_dump(experiment.model_dump(mode="json"), sort_keys=False)


def apply_full_scale(experiment: ExperimentConfig) -> ExperimentConfig:
    """Switch desk-scale sizes to the full-scale study settings."""
    update = experiment.model_copy(deep=True)
    update.full_scale = True
    update.plant.soft_robot.n_elems = 100
    update.monte_carlo.realizations = 100
    update.training.validation_rate_hz = 250.0
    return update
