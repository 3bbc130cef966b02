"""Multilabel expansion and card-coherent train/eval splitting.

A card with k labels becomes k single-label samples (the duplication
strategy for imbalanced multilabel data); the split keeps every copy of a
card on the same side so duplicated cards cannot leak between train and
eval.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

import numpy as np

from .cards import ColorLabel, TypeLabel
from .corpus import Corpus
from .errors import ConfigError

S = TypeVar("S")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise ConfigError(f"train_fraction must be in (0,1), got {self.train_fraction}")


def expand_multilabel(corpus: Corpus, labeling: str) -> list[tuple[str, int]]:
    """Expand each card into one (card_id, label_id) pair per label.

    Color labeling maps an empty identity to Colorless (exactly one entry);
    multicolored cards get one entry per identity color and never a
    Colorless copy. Type labeling drops cards whose merged type set is
    empty (e.g. pure Planeswalkers).
    """
    if labeling not in ("color", "type"):
        raise ConfigError(f"labeling must be 'color' or 'type', got {labeling!r}")
    pairs: list[tuple[str, int]] = []
    for card in corpus.cards:
        if labeling == "color":
            for label in card.color_identity.labels():
                pairs.append((card.id, label.value))
        else:
            for label in sorted(card.types, key=lambda t: t.value):
                pairs.append((card.id, label.value))
    return pairs


def _default_card_id(sample) -> str:
    if hasattr(sample, "card_id"):
        return sample.card_id
    return sample[0]


def split(
    samples: Sequence[S],
    spec: SplitSpec,
    card_id: Callable[[S], str] = _default_card_id,
) -> tuple[list[S], list[S]]:
    """Partition samples into (train, eval), keyed by card.

    All samples sharing a card_id land on the same side. Cards are ordered
    canonically then permuted with the seeded generator, so the split is
    deterministic and independent of input order. Train size hits
    round(train_fraction * len(samples)) exactly for mono-label data and
    within the boundary card's multiplicity otherwise.
    """
    if not samples:
        raise ConfigError("cannot split an empty sample list")
    groups: dict[str, list[int]] = {}
    for i, sample in enumerate(samples):
        groups.setdefault(card_id(sample), []).append(i)
    keys = sorted(groups)
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(len(keys))
    target = round(spec.train_fraction * len(samples))
    train_idx: list[int] = []
    eval_idx: list[int] = []
    count = 0
    for j in order:
        idxs = groups[keys[j]]
        if count < target:
            train_idx.extend(idxs)
            count += len(idxs)
        else:
            eval_idx.extend(idxs)
    train_idx.sort()
    eval_idx.sort()
    return [samples[i] for i in train_idx], [samples[i] for i in eval_idx]


def true_label_sets(pairs: Sequence[tuple[str, int]]) -> dict[str, set[int]]:
    """Per-card truth: the set of label ids a card expanded into."""
    truth: dict[str, set[int]] = {}
    for cid, label in pairs:
        truth.setdefault(cid, set()).add(label)
    return truth


def label_count(labeling: str) -> int:
    return len(ColorLabel) if labeling == "color" else len(TypeLabel)
