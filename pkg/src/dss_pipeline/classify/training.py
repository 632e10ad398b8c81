"""Backend-independent epoch loop with early stopping on validation score."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

from .artifact import EpochStats


@dataclass
class LoopResult:
    log: list[EpochStats]
    best_epoch: int
    best_state: Any


def run_epochs(
    train_epoch: Callable[[int], float],
    evaluate: Callable[[], tuple[float, float]],
    snapshot: Callable[[], Any],
    max_epochs: int,
    patience: int,
) -> LoopResult:
    """Run up to max_epochs epochs, keeping the best-validation snapshot.

    evaluate() returns (validation_accuracy, early_stop_score); training halts
    once the score has failed to improve for `patience` consecutive epochs.
    Improvement is strict, so a saturated metric (e.g. accuracy pinned at 1.0)
    stops the loop after exactly `patience` further epochs.
    """
    log: list[EpochStats] = []
    best_score = -math.inf
    best_epoch = 0
    best_state: Any = None
    stale = 0

    for epoch in range(1, max_epochs + 1):
        train_loss = train_epoch(epoch)
        val_accuracy, val_score = evaluate()
        log.append(EpochStats(epoch, train_loss, val_accuracy, val_score))
        if val_score > best_score:
            best_score = val_score
            best_epoch = epoch
            best_state = snapshot()
            stale = 0
        else:
            stale += 1
            if stale >= patience:
                break

    return LoopResult(log=log, best_epoch=best_epoch, best_state=best_state)
