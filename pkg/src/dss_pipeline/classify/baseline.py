"""Bag-of-words baseline: TF-IDF features with a multinomial logistic head.

The convex objective is minimised with warm-started L-BFGS; one "epoch"
continues the solver for a fixed number of iterations, which gives the
baseline the same epoch/early-stopping contract as the encoder backend and
makes training loss non-increasing across epochs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from sklearn.feature_extraction.text import TfidfVectorizer

from .config import ClassifierConfig
from .training import LoopResult, run_epochs

_L2 = 1e-4
_NUM_CLASSES = 3


@dataclass
class BaselineModel:
    vectorizer: TfidfVectorizer
    weights: np.ndarray  # (3, n_features)
    bias: np.ndarray  # (3,)

    def predict_scores(self, texts: list[str]) -> np.ndarray:
        features = self.vectorizer.transform(texts)
        logits = features @ self.weights.T + self.bias
        return _softmax(np.asarray(logits, dtype=np.float64))


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _objective(flat: np.ndarray, features, onehot: np.ndarray, l2: float):
    n, d = features.shape
    weights = flat[: _NUM_CLASSES * d].reshape(_NUM_CLASSES, d)
    bias = flat[_NUM_CLASSES * d :]
    logits = features @ weights.T + bias
    logits = np.asarray(logits)
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    log_probs = shifted - log_norm[:, None]
    loss = -(onehot * log_probs).sum() / n + 0.5 * l2 * (weights**2).sum()

    probs = np.exp(log_probs)
    delta = (probs - onehot) / n
    grad_weights = delta.T @ features + l2 * weights
    grad_bias = delta.sum(axis=0)
    grad = np.concatenate([np.asarray(grad_weights).ravel(), grad_bias])
    return loss, grad


def train_baseline(
    config: ClassifierConfig,
    train_texts: list[str],
    train_labels: np.ndarray,
    val_texts: list[str],
    score_fn,
) -> tuple[BaselineModel, LoopResult]:
    """Fit the baseline; score_fn maps validation scores to (accuracy, metric)."""
    vectorizer = TfidfVectorizer(ngram_range=(1, 2), min_df=1)
    features = vectorizer.fit_transform(train_texts)
    val_features = vectorizer.transform(val_texts)
    n, d = features.shape

    onehot = np.zeros((n, _NUM_CLASSES))
    onehot[np.arange(n), train_labels] = 1.0

    flat = np.zeros(_NUM_CLASSES * d + _NUM_CLASSES)
    state = {"flat": flat, "loss": None}

    def train_epoch(_epoch: int) -> float:
        result = minimize(
            _objective,
            state["flat"],
            args=(features, onehot, _L2),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": config.baseline_iterations_per_epoch},
        )
        state["flat"] = result.x
        state["loss"] = float(result.fun)
        return state["loss"]

    def current_model() -> BaselineModel:
        flat_now = state["flat"]
        return BaselineModel(
            vectorizer=vectorizer,
            weights=flat_now[: _NUM_CLASSES * d].reshape(_NUM_CLASSES, d).copy(),
            bias=flat_now[_NUM_CLASSES * d :].copy(),
        )

    def evaluate() -> tuple[float, float]:
        logits = val_features @ state["flat"][: _NUM_CLASSES * d].reshape(_NUM_CLASSES, d).T
        logits = np.asarray(logits) + state["flat"][_NUM_CLASSES * d :]
        preds = np.argmax(logits, axis=1)
        return score_fn(preds)

    loop = run_epochs(
        train_epoch=train_epoch,
        evaluate=evaluate,
        snapshot=current_model,
        max_epochs=config.max_epochs,
        patience=config.patience,
    )
    return loop.best_state, loop
