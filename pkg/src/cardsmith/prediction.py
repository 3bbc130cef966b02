"""Prediction vectors: the normalized per-label scores every classifier emits.

All pipeline comparisons happen on these: a vector is a distribution over a
fixed label set (scores >= 0, summing to 1), and distances between two
vectors over the same label set are plain L1 sums.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .cards import COLOR_LABELS, TYPE_LABELS
from .errors import LabelSetError

SUM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class PredictionVector:
    labels: tuple[str, ...]
    scores: tuple[float, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.scores):
            raise LabelSetError("labels and scores length mismatch")
        if len(set(self.labels)) != len(self.labels):
            raise LabelSetError("duplicate labels")
        arr = np.asarray(self.scores, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise LabelSetError("non-finite score")
        if np.any(arr < 0):
            raise LabelSetError("negative score")
        if abs(float(arr.sum()) - 1.0) > SUM_TOLERANCE:
            raise LabelSetError(f"scores sum to {arr.sum()}, not 1")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.labels, self.scores))

    def as_array(self, label_order: Sequence[str] | None = None) -> np.ndarray:
        if label_order is None:
            return np.asarray(self.scores, dtype=np.float64)
        lookup = self.as_dict()
        try:
            return np.asarray([lookup[l] for l in label_order], dtype=np.float64)
        except KeyError as exc:
            raise LabelSetError(f"label {exc.args[0]!r} absent from vector") from exc

    def argmax_label(self) -> str:
        return self.labels[int(np.argmax(self.scores))]


def normalize(scores: Mapping[str, float], labels: Sequence[str] | None = None) -> PredictionVector:
    """Clamp negatives to zero and rescale to a unit-sum distribution.

    An all-zero input becomes the uniform vector. Idempotent on vectors that
    are already normalized.
    """
    order = tuple(labels) if labels is not None else tuple(scores.keys())
    if not order:
        raise LabelSetError("empty label set")
    raw = np.asarray([float(scores[l]) for l in order], dtype=np.float64)
    raw = np.clip(raw, 0.0, None)
    total = float(raw.sum())
    if total <= 0.0:
        raw = np.full(len(order), 1.0 / len(order))
    else:
        raw = raw / total
    return PredictionVector(order, tuple(float(x) for x in raw))


def label_distance(a: PredictionVector, b: PredictionVector) -> float:
    """Sum over labels of the absolute score differences (L1)."""
    if set(a.labels) != set(b.labels):
        raise LabelSetError(f"label sets differ: {sorted(a.labels)} vs {sorted(b.labels)}")
    return float(np.abs(a.as_array() - b.as_array(a.labels)).sum())


def from_probabilities(probs: Sequence[float], label_set: str) -> PredictionVector:
    """Wrap raw model probabilities for the named label set ('color' or 'type')."""
    labels = labels_for(label_set)
    if len(probs) != len(labels):
        raise LabelSetError(f"{label_set} expects {len(labels)} scores, got {len(probs)}")
    return normalize(dict(zip(labels, (float(p) for p in probs))))


def labels_for(label_set: str) -> tuple[str, ...]:
    if label_set == "color":
        return COLOR_LABELS
    if label_set == "type":
        return TYPE_LABELS
    raise LabelSetError(f"unknown label set {label_set!r}")
