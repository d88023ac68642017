"""
Model repository: trained L-GP posteriors as YAML documents.
"""

from pathlib import Path

import numpy as np
import yaml

from shared.config import SCHEMA_VERSION
from shared.storage import BaseRepository, decode_floats, encode_floats
from shared.utils.logging import get_logger

from .models import Hyperparams, TrainingSet
from .posterior import LgpModel, fit
from .priors import PriorDocument

logger = get_logger(__name__)


class ModelRepository(BaseRepository[LgpModel]):
    """
    Repository for trained L-GP models.

    The document holds hyperparameters, the prior spec, the training set and
    the weight vector, floats as ``float.hex`` strings. Loading refits from
    the stored data and checks that the weights come back bit-identical.
    """

    suffix = ".yml"

    def _write(self, obj: LgpModel, path: Path) -> None:
        if obj.prior_spec is None:
            raise ValueError("model has no serializable prior spec")
        training = obj.training
        document = {
            "schema_version": SCHEMA_VERSION,
            "kind": "lgp_model",
            "hyper": obj.hyper.model_dump(mode="json"),
            "prior": obj.prior_spec.model_dump(mode="json"),
            "training": {
                "torque_noise": float(training.torque_noise).hex(),
                "acceleration_noise": float(training.acceleration_noise).hex(),
                "q": encode_floats(training.q),
                "dq": encode_floats(training.dq),
                "ddq": encode_floats(training.ddq),
                "y": encode_floats(training.y),
            },
            "jitter": float(obj.jitter).hex(),
            "weights": encode_floats(obj.weights),
        }
        path.write_text(yaml.safe_dump(document, sort_keys=False), encoding="utf-8")

    def _read(self, path: Path) -> LgpModel:
        document = yaml.safe_load(path.read_text(encoding="utf-8"))
        if not isinstance(document, dict) or document.get("kind") != "lgp_model":
            raise ValueError("not an L-GP model document")
        if str(document.get("schema_version")) != SCHEMA_VERSION:
            version = document.get("schema_version")
            raise ValueError(f"unsupported schema version {version}")
        hyper = Hyperparams.model_validate(document["hyper"])
        spec = PriorDocument.model_validate({"prior": document["prior"]}).prior
        stored = document["training"]
        training = TrainingSet(
            q=decode_floats(stored["q"]),
            dq=decode_floats(stored["dq"]),
            ddq=decode_floats(stored["ddq"]),
            y=decode_floats(stored["y"]),
            torque_noise=float(decode_floats(stored["torque_noise"])),
            acceleration_noise=float(decode_floats(stored["acceleration_noise"])),
        )
        model = fit(training, hyper, spec.build(), prior_spec=spec)
        weights = decode_floats(document["weights"])
        if not np.array_equal(model.weights, weights):
            logger.warning(
                "lgp.weights_mismatch",
                path=str(path),
                max_difference=float(np.max(np.abs(model.weights - weights))),
            )
        return model
