"""Shared training-loop helpers: canonical ordering, plateau decay, per-card scoring."""

from __future__ import annotations

import hashlib
import math

import numpy as np

from .errors import DivergenceError


def content_digest(arr: np.ndarray) -> str:
    return hashlib.sha1(np.ascontiguousarray(arr).tobytes()).hexdigest()


def canonical_order(card_ids: list[str], labels: np.ndarray, payloads: np.ndarray) -> np.ndarray:
    """Indices that sort samples by (card_id, label_id, content digest).

    Training consumes samples in this order before the seeded shuffle, so a
    permutation of the input cannot change the realized batch sequence.
    """
    keys = [(card_ids[i], int(labels[i]), content_digest(payloads[i])) for i in range(len(labels))]
    return np.asarray(sorted(range(len(keys)), key=keys.__getitem__), dtype=np.int64)


def ensure_finite(loss: float, epoch: int) -> None:
    if not math.isfinite(loss):
        raise DivergenceError(f"non-finite training loss {loss} at epoch {epoch}; lower the learning rate")


class PlateauDecay:
    """Multiply the learning rate by `factor` when eval accuracy has not
    improved for `patience` consecutive epochs."""

    def __init__(self, optimizer, patience: int = 3, factor: float = 0.1):
        self.optimizer = optimizer
        self.patience = patience
        self.factor = factor
        self.best = -math.inf
        self.stale = 0

    def step(self, accuracy: float) -> None:
        if accuracy > self.best:
            self.best = accuracy
            self.stale = 0
            return
        self.stale += 1
        if self.stale >= self.patience:
            for group in self.optimizer.param_groups:
                group["lr"] *= self.factor
            self.stale = 0


def per_card_accuracy(card_ids: list[str], argmax_labels: np.ndarray, truth: dict[str, set[int]]) -> float:
    """Fraction of cards whose predicted argmax is in the card's true label set.

    Duplicated samples of one card count once; the first record of each card
    supplies the prediction (copies share pixels, so argmax agrees).
    """
    seen: dict[str, int] = {}
    for i, cid in enumerate(card_ids):
        if cid not in seen:
            seen[cid] = int(argmax_labels[i])
    correct = sum(1 for cid, pred in seen.items() if pred in truth.get(cid, set()))
    return correct / len(seen)
