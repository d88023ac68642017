"""
Lagrangian Gaussian process: structured kernels, posterior and hyperparameter search.
"""

from .kernels import (
    KernelPack,
    LatentTerm,
    build_terms,
    cross_covariance,
    gram,
    kernel_tau,
    noise_blocks,
    se_pack,
)
from .models import CovarianceQuery, Hyperparams, TrainingSet
from .optimizer import (
    HyperSearch,
    ResimulationTarget,
    optimize_hyper,
    resimulation_objective,
    torque_objective,
)
from .posterior import (
    LgpDynamics,
    LgpModel,
    PosteriorComponents,
    fit,
    predict_components,
    predict_cov,
    predict_tau,
)
from .priors import (
    PriorDocument,
    PriorModel,
    PriorSpec,
    ReducedChainPrior,
    TwoLinkPrior,
    ZeroPrior,
)
from .repository import ModelRepository

__all__ = [
    "ModelRepository",
    "Hyperparams",
    "TrainingSet",
    "CovarianceQuery",
    "KernelPack",
    "LatentTerm",
    "se_pack",
    "build_terms",
    "cross_covariance",
    "kernel_tau",
    "noise_blocks",
    "gram",
    "LgpModel",
    "LgpDynamics",
    "PosteriorComponents",
    "fit",
    "predict_tau",
    "predict_components",
    "predict_cov",
    "HyperSearch",
    "ResimulationTarget",
    "optimize_hyper",
    "torque_objective",
    "resimulation_objective",
    "PriorModel",
    "PriorSpec",
    "PriorDocument",
    "TwoLinkPrior",
    "ReducedChainPrior",
    "ZeroPrior",
]
