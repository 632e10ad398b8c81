"""Three-class DSS classifiers: encoder fine-tuning and a bag-of-words baseline.

Both backends share one training contract: epoch loop, early stopping on a
validation metric, best-epoch checkpointing, and a per-epoch training log.
"""
from __future__ import annotations

import numpy as np

from ..errors import EmptySegmentError, EmptyTextError, UnlabeledRecordError
from ..labels import LABEL_ORDER, Label
from ..metrics import EvaluationReport, build_report, confusion, metrics
from ..records import CorpusRecord
from ..store import DatasetSplit
from .artifact import EpochStats, ModelArtifact, Prediction, load_artifact, save_artifact
from .baseline import BaselineModel, train_baseline
from .config import ClassifierConfig
from .encoder import encoder_scores, train_encoder
from .providers import EncoderBundle, load_bundle, register_provider

__all__ = [
    "BaselineModel",
    "ClassifierConfig",
    "EncoderBundle",
    "EpochStats",
    "ModelArtifact",
    "Prediction",
    "evaluate_split",
    "load_artifact",
    "load_bundle",
    "predict",
    "predict_batch",
    "register_provider",
    "save_artifact",
    "target_label",
    "tokenize_for_encoder",
    "train",
]


def target_label(record: CorpusRecord, target: str) -> Label | None:
    if target == "original_category":
        return record.original_category
    if target == "manual_label":
        return record.manual_label
    raise ValueError(f"unknown target {target!r}")


def _segment_records(
    records: list[CorpusRecord], split: DatasetSplit
) -> tuple[list[CorpusRecord], list[CorpusRecord], list[CorpusRecord]]:
    by_id = {r.nct_id: r for r in records}
    segments = []
    for name, ids in (
        ("train", split.train_ids),
        ("validation", split.validation_ids),
        ("test", split.test_ids),
    ):
        members = [by_id[i] for i in sorted(ids) if i in by_id]
        if not members:
            raise EmptySegmentError(f"split segment {name!r} is empty")
        segments.append(members)
    return tuple(segments)


def _labels_as_ints(records: list[CorpusRecord], target: str) -> np.ndarray:
    values = []
    for record in records:
        label = target_label(record, target)
        if label is None:
            raise UnlabeledRecordError(f"record {record.nct_id} lacks target {target!r}")
        values.append(LABEL_ORDER.index(label))
    return np.array(values, dtype=np.int64)


def train(
    config: ClassifierConfig, records: list[CorpusRecord], split: DatasetSplit
) -> ModelArtifact:
    """Train one classifier on the split's train segment, early-stopping on
    the validation segment, and return the best-epoch artifact."""
    config = config.resolve()
    train_records, val_records, _ = _segment_records(records, split)
    train_texts = [r.dss_text for r in train_records]
    train_labels = _labels_as_ints(train_records, config.target)
    val_texts = [r.dss_text for r in val_records]
    val_labels = _labels_as_ints(val_records, config.target)

    def score_fn(pred_indices: np.ndarray) -> tuple[float, float]:
        accuracy = float(np.mean(pred_indices == val_labels))
        if config.early_stopping_metric == "accuracy":
            return accuracy, accuracy
        golds = [LABEL_ORDER[i] for i in val_labels]
        preds = [LABEL_ORDER[i] for i in pred_indices]
        macro_f1 = metrics(confusion(golds, preds)).f1
        return accuracy, macro_f1

    if config.backend == "baseline":
        model, loop = train_baseline(config, train_texts, train_labels, val_texts, score_fn)
        payload: object = model
    else:
        state_dict, loop = train_encoder(config, train_texts, train_labels, val_texts, score_fn)
        payload = {"state_dict": state_dict}

    return ModelArtifact(
        config=config,
        training_log=loop.log,
        best_epoch=loop.best_epoch,
        split_seed=split.seed,
        payload=payload,
    )


def _score_texts(artifact: ModelArtifact, texts: list[str]) -> np.ndarray:
    for text in texts:
        if not text or not text.strip():
            raise EmptyTextError("cannot classify empty text")
    if artifact.config.backend == "baseline":
        scores = artifact.payload.predict_scores(texts)
    else:
        scores = encoder_scores(artifact.payload["state_dict"], artifact.config, texts)
    # Guard the probability-simplex contract against float drift.
    return scores / scores.sum(axis=1, keepdims=True)


def _prediction_from_scores(row: np.ndarray) -> Prediction:
    index = int(np.argmax(row))  # first maximum wins ties, matching LABEL_ORDER
    return Prediction(label=LABEL_ORDER[index], scores=tuple(float(x) for x in row))


def predict(artifact: ModelArtifact, text: str) -> Prediction:
    return _prediction_from_scores(_score_texts(artifact, [text])[0])


def predict_batch(artifact: ModelArtifact, texts: list[str]) -> list[Prediction]:
    if not texts:
        return []
    scores = _score_texts(artifact, list(texts))
    return [_prediction_from_scores(row) for row in scores]


def tokenize_for_encoder(
    text: str, max_sequence_tokens: int, checkpoint_name: str, seed: int = 0
) -> list[int]:
    """Token id sequence for a checkpoint's vocabulary, capped at the limit
    (start/separator markers included; truncation keeps the text prefix)."""
    if not text:
        raise EmptyTextError("cannot tokenize empty text")
    bundle = load_bundle(checkpoint_name, seed)
    return bundle.token_ids(text, max_sequence_tokens)


def evaluate_split(
    artifact: ModelArtifact,
    records: list[CorpusRecord],
    segment: str = "test",
    target: str | None = None,
    averaging: str = "macro",
) -> EvaluationReport:
    """Score one split segment and build the evaluation report."""
    target = target or artifact.config.target
    segment_records = [r for r in records if r.split == segment]
    if not segment_records:
        raise EmptySegmentError(f"no records in segment {segment!r}")
    golds = []
    for record in segment_records:
        label = target_label(record, target)
        if label is None:
            raise UnlabeledRecordError(f"record {record.nct_id} lacks target {target!r}")
        golds.append(label)
    preds = [p.label for p in predict_batch(artifact, [r.dss_text for r in segment_records])]
    return build_report(
        golds,
        preds,
        target=target,
        config_echo=artifact.config.as_dict(),
        split_seed=artifact.split_seed,
        averaging=averaging,
        segment=segment,
    )
