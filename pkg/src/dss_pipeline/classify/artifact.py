"""Trained-model bundles and their single-file serialisation."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import joblib

from ..labels import LABEL_ORDER, Label
from .config import ClassifierConfig


@dataclass(frozen=True)
class EpochStats:
    epoch: int  # 1-based
    train_loss: float
    validation_accuracy: float
    validation_score: float  # the early-stopping metric (accuracy by default)


@dataclass(frozen=True)
class Prediction:
    label: Label
    scores: tuple[float, float, float]  # aligned with LABEL_ORDER, sums to 1


@dataclass
class ModelArtifact:
    """Everything needed to run and audit one trained classifier."""

    config: ClassifierConfig
    training_log: list[EpochStats]
    best_epoch: int
    split_seed: int
    payload: object  # backend-specific model state
    label_order: tuple[Label, Label, Label] = LABEL_ORDER


def save_artifact(artifact: ModelArtifact, path: str | Path) -> None:
    """Persist as one file. The baseline payload is plain arrays plus a
    vocabulary, so the bundle is portable; the encoder payload delegates its
    tensor format to torch."""
    bundle = {
        "format": "dss-model-bundle/1",
        "backend": artifact.config.backend,
        "config": artifact.config.as_dict(),
        "label_order": [label.value for label in artifact.label_order],
        "training_log": [
            (s.epoch, s.train_loss, s.validation_accuracy, s.validation_score)
            for s in artifact.training_log
        ],
        "best_epoch": artifact.best_epoch,
        "split_seed": artifact.split_seed,
        "payload": artifact.payload,
    }
    joblib.dump(bundle, path)


def load_artifact(path: str | Path) -> ModelArtifact:
    bundle = joblib.load(path)
    if not isinstance(bundle, dict) or bundle.get("format") != "dss-model-bundle/1":
        raise ValueError(f"{path} is not a model bundle")
    config = ClassifierConfig.from_dict(bundle["config"])
    return ModelArtifact(
        config=config,
        training_log=[EpochStats(*row) for row in bundle["training_log"]],
        best_epoch=bundle["best_epoch"],
        split_seed=bundle["split_seed"],
        payload=bundle["payload"],
        label_order=tuple(Label.parse(v) for v in bundle["label_order"]),
    )
