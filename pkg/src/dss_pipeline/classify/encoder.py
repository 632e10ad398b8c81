"""Fine-tuning loop for pre-trained encoders with a classification head."""
from __future__ import annotations

import copy

import numpy as np
import torch
from torch import nn

from .config import ClassifierConfig
from .providers import EncoderBundle, load_bundle
from .training import LoopResult, run_epochs


def _batches(count: int, batch_size: int, generator: torch.Generator):
    order = torch.randperm(count, generator=generator).tolist()
    for start in range(0, count, batch_size):
        yield order[start : start + batch_size]


def _scores_for(bundle: EncoderBundle, texts: list[str], max_tokens: int, batch_size: int) -> np.ndarray:
    bundle.model.eval()
    chunks = []
    with torch.no_grad():
        for start in range(0, len(texts), batch_size):
            ids, mask = bundle.encode_batch(texts[start : start + batch_size], max_tokens)
            logits = bundle.model(ids, mask).to(torch.float64)
            chunks.append(torch.softmax(logits, dim=1).numpy())
    return np.concatenate(chunks) if chunks else np.zeros((0, 3))


def train_encoder(
    config: ClassifierConfig,
    train_texts: list[str],
    train_labels: np.ndarray,
    val_texts: list[str],
    score_fn,
) -> tuple[dict, LoopResult]:
    """Fine-tune with AdamW; returns the best-epoch state_dict and the log."""
    torch.manual_seed(config.seed)
    bundle = load_bundle(config.checkpoint_name, config.seed)
    optimizer = torch.optim.AdamW(bundle.model.parameters(), lr=config.resolved_learning_rate())
    loss_fn = nn.CrossEntropyLoss()
    labels_tensor = torch.tensor(train_labels, dtype=torch.long)
    shuffler = torch.Generator().manual_seed(config.seed)

    def train_epoch(_epoch: int) -> float:
        bundle.model.train()
        total = 0.0
        for batch in _batches(len(train_texts), config.batch_size, shuffler):
            ids, mask = bundle.encode_batch(
                [train_texts[i] for i in batch], config.max_sequence_tokens
            )
            optimizer.zero_grad()
            logits = bundle.model(ids, mask)
            loss = loss_fn(logits, labels_tensor[batch])
            loss.backward()
            optimizer.step()
            total += loss.item() * len(batch)
        return total / len(train_texts)

    def evaluate() -> tuple[float, float]:
        scores = _scores_for(bundle, val_texts, config.max_sequence_tokens, config.batch_size)
        return score_fn(np.argmax(scores, axis=1))

    def snapshot() -> dict:
        return copy.deepcopy(bundle.model.state_dict())

    loop = run_epochs(
        train_epoch=train_epoch,
        evaluate=evaluate,
        snapshot=snapshot,
        max_epochs=config.max_epochs,
        patience=config.patience,
    )
    return loop.best_state, loop


def encoder_scores(
    state_dict: dict, config: ClassifierConfig, texts: list[str]
) -> np.ndarray:
    """Rebuild the model for the artifact's checkpoint and score texts."""
    bundle = load_bundle(config.checkpoint_name, config.seed)
    bundle.model.load_state_dict(state_dict)
    return _scores_for(bundle, texts, config.max_sequence_tokens, config.batch_size)
