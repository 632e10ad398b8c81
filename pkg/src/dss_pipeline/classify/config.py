"""Classifier run configuration."""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from pathlib import Path

import yaml

BACKENDS = ("encoder", "baseline")
TARGETS = ("original_category", "manual_label")
EARLY_STOP_METRICS = ("accuracy", "macro_f1")

DEFAULT_ENCODER_LR = 2e-5
DEFAULT_BASELINE_LR = 1.0


@dataclass(frozen=True)
class ClassifierConfig:
    backend: str = "baseline"
    checkpoint_name: str = ""  # encoder backend only
    target: str = "manual_label"
    max_sequence_tokens: int = 128
    learning_rate: float | None = None  # backend default when None
    batch_size: int = 16
    max_epochs: int = 6
    patience: int = 2
    seed: int = 42
    early_stopping_metric: str = "accuracy"
    # One baseline "epoch" continues the convex solver for this many iterations.
    baseline_iterations_per_epoch: int = 20

    def validated(self) -> "ClassifierConfig":
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}: {self.backend!r}")
        if self.target not in TARGETS:
            raise ValueError(f"target must be one of {TARGETS}: {self.target!r}")
        if self.early_stopping_metric not in EARLY_STOP_METRICS:
            raise ValueError(
                f"early_stopping_metric must be one of {EARLY_STOP_METRICS}:"
                f" {self.early_stopping_metric!r}"
            )
        if self.backend == "encoder" and not self.checkpoint_name:
            raise ValueError("encoder backend needs a checkpoint_name")
        for name in ("max_sequence_tokens", "batch_size", "max_epochs", "patience",
                     "baseline_iterations_per_epoch"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.learning_rate is not None and self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        return self

    def resolved_learning_rate(self) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return DEFAULT_ENCODER_LR if self.backend == "encoder" else DEFAULT_BASELINE_LR

    def resolve(self) -> "ClassifierConfig":
        """Pin backend-dependent defaults so artifacts record actual values."""
        return replace(self.validated(), learning_rate=self.resolved_learning_rate())

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ClassifierConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown classifier config keys: {sorted(unknown)}")
        return cls(**data).validated()

    @classmethod
    def from_file(cls, path: str | Path) -> "ClassifierConfig":
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        if not isinstance(data, dict):
            raise ValueError(f"classifier config {path} must be a mapping")
        if "classifier" in data and isinstance(data["classifier"], dict):
            data = data["classifier"]
        return cls.from_dict(data)
