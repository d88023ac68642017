"""
Configuration module for lgp-control.
Unites runtime settings and experiment documents in one place.
"""

from .base import BaseConfig, config, get_config
from .experiment import (
    SCHEMA_VERSION,
    AdaptationConfig,
    CertificateConfig,
    ControllerEntry,
    ExperimentConfig,
    GridSpec,
    HyperConfig,
    IntegrationConfig,
    MonteCarloConfig,
    PlantConfig,
    ReferenceConfig,
    SearchGrid,
    SoftRobotPlantConfig,
    TrainingConfig,
    TwoLinkPlantConfig,
    apply_full_scale,
    build_experiment,
    default_roster,
    dump_experiment,
    load_experiment,
    parse_overrides,
)

__all__ = [
    # Runtime settings
    "BaseConfig",
    "config",
    "get_config",
    # Experiment documents
    "SCHEMA_VERSION",
    "ExperimentConfig",
    "PlantConfig",
    "TwoLinkPlantConfig",
    "SoftRobotPlantConfig",
    "TrainingConfig",
    "GridSpec",
    "HyperConfig",
    "ControllerEntry",
    "AdaptationConfig",
    "ReferenceConfig",
    "IntegrationConfig",
    "CertificateConfig",
    "SearchGrid",
    "MonteCarloConfig",
    "default_roster",
    "load_experiment",
    "build_experiment",
    "dump_experiment",
    "parse_overrides",
    "apply_full_scale",
]
