"""Pluggable encoder checkpoints.

Checkpoints are referenced by name; resolution picks a provider that can
build a tokenizer and a sequence-classification module for that name. Names
starting with "tiny-random" map to a small randomly initialised transformer
so the full training contract can run offline in seconds; anything else is
loaded from the transformers hub.
"""
from __future__ import annotations

import re
import zlib
from typing import Callable

import torch
from torch import nn

from ..errors import CheckpointUnavailableError, VocabularyUnavailableError

TINY_PREFIX = "tiny-random"

_TINY_VOCAB = 512
_TINY_DIM = 32
_TINY_HEADS = 4
_TINY_LAYERS = 1
_TINY_MAX_POSITIONS = 512

_PAD, _CLS, _SEP, _UNK = 0, 1, 2, 3
_WORD = re.compile(r"[\w']+")


class EncoderBundle:
    """A tokenizer plus a module mapping token batches to 3-class logits."""

    def __init__(self, model: nn.Module, token_ids: Callable[[str, int], list[int]], pad_id: int):
        self.model = model
        self.token_ids = token_ids
        self.pad_id = pad_id

    def encode_batch(self, texts: list[str], max_tokens: int) -> tuple[torch.Tensor, torch.Tensor]:
        sequences = [self.token_ids(text, max_tokens) for text in texts]
        width = max(len(s) for s in sequences)
        ids = torch.full((len(sequences), width), self.pad_id, dtype=torch.long)
        mask = torch.zeros((len(sequences), width), dtype=torch.long)
        for i, seq in enumerate(sequences):
            ids[i, : len(seq)] = torch.tensor(seq, dtype=torch.long)
            mask[i, : len(seq)] = 1
        return ids, mask


class TinyEncoder(nn.Module):
    """One-layer transformer encoder with a mean-pooled classification head."""

    def __init__(self, num_labels: int = 3):
        super().__init__()
        self.embeddings = nn.Embedding(_TINY_VOCAB, _TINY_DIM, padding_idx=_PAD)
        self.positions = nn.Embedding(_TINY_MAX_POSITIONS, _TINY_DIM)
        layer = nn.TransformerEncoderLayer(
            d_model=_TINY_DIM,
            nhead=_TINY_HEADS,
            dim_feedforward=4 * _TINY_DIM,
            batch_first=True,
            dropout=0.0,
        )
        self.encoder = nn.TransformerEncoder(
            layer, num_layers=_TINY_LAYERS, enable_nested_tensor=False
        )
        self.classifier = nn.Linear(_TINY_DIM, num_labels)

    def forward(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(input_ids.shape[1], device=input_ids.device)
        hidden = self.embeddings(input_ids) + self.positions(positions)[None, :, :]
        hidden = self.encoder(hidden, src_key_padding_mask=attention_mask == 0)
        mask = attention_mask.unsqueeze(-1).to(hidden.dtype)
        pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)
        return self.classifier(pooled)


def _tiny_word_id(token: str) -> int:
    return 4 + zlib.crc32(token.encode("utf-8")) % (_TINY_VOCAB - 4)


def _tiny_token_ids(text: str, max_tokens: int) -> list[int]:
    if max_tokens < 2:
        raise ValueError("max_tokens must leave room for the start/separator markers")
    words = _WORD.findall(text.lower())
    body = [_tiny_word_id(w) for w in words][: max_tokens - 2]
    return [_CLS] + body + [_SEP]


def load_tiny_bundle(seed: int) -> EncoderBundle:
    generator_state = torch.random.get_rng_state()
    try:
        torch.manual_seed(seed)
        model = TinyEncoder()
    finally:
        torch.random.set_rng_state(generator_state)
    return EncoderBundle(model=model, token_ids=_tiny_token_ids, pad_id=_PAD)


def load_hub_bundle(checkpoint_name: str) -> EncoderBundle:
    try:
        from transformers import AutoModelForSequenceClassification, AutoTokenizer
    except ImportError as exc:
        raise CheckpointUnavailableError(
            f"transformers is not installed; cannot load {checkpoint_name!r}"
        ) from exc
    try:
        tokenizer = AutoTokenizer.from_pretrained(checkpoint_name)
    except Exception as exc:
        raise VocabularyUnavailableError(
            f"cannot load tokenizer for {checkpoint_name!r}: {exc}"
        ) from exc
    try:
        model = AutoModelForSequenceClassification.from_pretrained(
            checkpoint_name, num_labels=3
        )
    except Exception as exc:
        raise CheckpointUnavailableError(
            f"cannot load checkpoint {checkpoint_name!r}: {exc}"
        ) from exc

    def token_ids(text: str, max_tokens: int) -> list[int]:
        return tokenizer(text, truncation=True, max_length=max_tokens)["input_ids"]

    class _HubModule(nn.Module):
        def __init__(self, inner):
            super().__init__()
            self.inner = inner

        def forward(self, input_ids, attention_mask):
            return self.inner(input_ids=input_ids, attention_mask=attention_mask).logits

    pad_id = tokenizer.pad_token_id if tokenizer.pad_token_id is not None else 0
    return EncoderBundle(model=_HubModule(model), token_ids=token_ids, pad_id=pad_id)


_CUSTOM_PROVIDERS: dict[str, Callable[[str, int], EncoderBundle]] = {}


def register_provider(prefix: str, loader: Callable[[str, int], EncoderBundle]) -> None:
    """Register a loader for checkpoint names starting with `prefix`.

    The loader is called as loader(checkpoint_name, seed).
    """
    _CUSTOM_PROVIDERS[prefix] = loader


def load_bundle(checkpoint_name: str, seed: int) -> EncoderBundle:
    for prefix, loader in _CUSTOM_PROVIDERS.items():
        if checkpoint_name.startswith(prefix):
            return loader(checkpoint_name, seed)
    if checkpoint_name.startswith(TINY_PREFIX):
        return load_tiny_bundle(seed)
    return load_hub_bundle(checkpoint_name)
