"""Embedding-plus-convolution classifier for card rules text.

Tokens are embedded, convolved with several filter widths, max-pooled over
time, and classified through a softmax output; the same architecture serves
the color and type label sets and tags every generated card in the bank.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np
import torch
from torch import nn

from .artifacts import load_artifact, save_artifact
from .errors import ConfigError
from .prediction import PredictionVector, from_probabilities, labels_for
from .report import EpochStats, TrainReport
from .textenc import TextSample, Vocabulary, encode_text
from .training import PlateauDecay, canonical_order, ensure_finite, per_card_accuracy
from . import datasets


@dataclass
class TextCNNConfig:
    label_set: str = "color"
    vocab_size: int = 0
    embedding_dim: int = 128
    filter_widths: tuple[int, ...] = (3, 4, 5)
    filters_per_width: int = 100
    max_len: int = 128
    dropout: float = 0.5
    learning_rate: float = 1e-3
    lr_decay: float = 0.1
    plateau_epochs: int = 3
    epochs: int = 10
    batch_size: int = 64
    seed: int = 0
    label_count_override: int | None = None

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if isinstance(self.filter_widths, list):
            self.filter_widths = tuple(self.filter_widths)
        if self.max_len < max(self.filter_widths, default=1):
            raise ConfigError("max_len shorter than the widest filter")

    @property
    def label_count(self) -> int:
        if self.label_count_override is not None:
            return self.label_count_override
        return len(labels_for(self.label_set))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TextCNNConfig":
        return cls(**data)


class TextCNN(nn.Module):
    def __init__(self, config: TextCNNConfig):
        super().__init__()
        if config.vocab_size < 2:
            raise ConfigError("vocab_size must cover at least the PAD and UNK sentinels")
        self.config = config
        self.embedding = nn.Embedding(config.vocab_size, config.embedding_dim, padding_idx=0)
        self.convs = nn.ModuleList(
            nn.Conv1d(config.embedding_dim, config.filters_per_width, w) for w in config.filter_widths
        )
        self.dropout = nn.Dropout(config.dropout)
        self.out = nn.Linear(config.filters_per_width * len(config.filter_widths), config.label_count)

    def forward(self, token_ids: torch.Tensor) -> torch.Tensor:
        x = self.embedding(token_ids).transpose(1, 2)  # (B, D, L)
        pooled = [torch.relu(conv(x)).max(dim=2).values for conv in self.convs]
        features = self.dropout(torch.cat(pooled, dim=1))
        return self.out(features)


def _stack(samples: list[TextSample]) -> tuple[torch.Tensor, torch.Tensor, list[str]]:
    ids = np.stack([s.token_ids for s in samples])
    labels = np.asarray([s.label_id for s in samples], dtype=np.int64)
    return torch.from_numpy(ids), torch.from_numpy(labels), [s.card_id for s in samples]


def train_text(config: TextCNNConfig, train_samples: list[TextSample],
               eval_samples: list[TextSample]) -> tuple[TextCNN, TrainReport]:
    """Same contracts as the image trainer: deterministic under seed,
    divergence aborts, per-card eval accuracy each epoch."""
    if not train_samples:
        raise ConfigError("training sample list is empty")
    if not eval_samples:
        raise ConfigError("eval sample list is empty")
    max_id = max(int(s.token_ids.max(initial=0)) for s in train_samples + eval_samples)
    if max_id >= config.vocab_size:
        raise ConfigError(f"token id {max_id} outside vocab_size {config.vocab_size}")

    ids = np.stack([s.token_ids for s in train_samples])
    labels = np.asarray([s.label_id for s in train_samples], dtype=np.int64)
    card_ids = [s.card_id for s in train_samples]
    order = canonical_order(card_ids, labels, ids)
    inputs = torch.from_numpy(ids[order])
    targets = torch.from_numpy(labels[order])

    eval_inputs, eval_labels, eval_card_ids = _stack(eval_samples)
    truth = datasets.true_label_sets([(s.card_id, s.label_id) for s in eval_samples])

    torch.manual_seed(config.seed)
    model = TextCNN(config)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    scheduler = PlateauDecay(optimizer, patience=config.plateau_epochs, factor=config.lr_decay)
    loss_fn = nn.CrossEntropyLoss()
    rng = np.random.default_rng(config.seed)

    report = TrainReport(kind="text", config=config.to_dict())
    n = len(targets)
    for epoch in range(config.epochs):
        start = time.monotonic()
        model.train()
        perm = rng.permutation(n)
        total = 0.0
        for begin in range(0, n, config.batch_size):
            idx = torch.from_numpy(perm[begin : begin + config.batch_size])
            optimizer.zero_grad()
            loss = loss_fn(model(inputs[idx]), targets[idx])
            loss.backward()
            optimizer.step()
            total += float(loss.item()) * len(idx)
        epoch_loss = total / n
        ensure_finite(epoch_loss, epoch)
        accuracy = _eval_accuracy(model, eval_inputs, eval_card_ids, truth)
        scheduler.step(accuracy)
        report.epochs.append(EpochStats(epoch, epoch_loss, accuracy, time.monotonic() - start))
    report.final_accuracy = report.epochs[-1].eval_accuracy if report.epochs else None
    model.eval()
    return model, report


def _eval_accuracy(model: TextCNN, inputs: torch.Tensor, card_ids: list[str],
                   truth: dict[str, set[int]]) -> float:
    model.eval()
    preds = []
    with torch.no_grad():
        for begin in range(0, len(inputs), 1024):
            preds.append(model(inputs[begin : begin + 1024]).argmax(dim=1).numpy())
    return per_card_accuracy(card_ids, np.concatenate(preds), truth)


def predict_text(model: TextCNN, vocab: Vocabulary, text: str) -> PredictionVector:
    """Prediction vector for any raw text; the encoder handles OOV and padding."""
    token_ids = encode_text(text, vocab, model.config.max_len)
    model.eval()
    with torch.no_grad():
        logits = model(torch.from_numpy(token_ids[None])).double()
        probs = torch.softmax(logits, dim=1)[0].numpy()
    return from_probabilities(probs, model.config.label_set)


def save_text_model(model: TextCNN, vocab: Vocabulary, path) -> None:
    save_artifact(path, "text", model.config.to_dict(), model.state_dict(), vocab_tokens=vocab.tokens)


def load_text_model(path) -> tuple[TextCNN, Vocabulary]:
    payload = load_artifact(path, expected_kind="text")
    config = TextCNNConfig.from_dict(payload["config"])
    model = TextCNN(config)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    vocab = Vocabulary.__new__(Vocabulary)
    vocab.tokens = payload["vocab_tokens"]
    vocab.index = {t: i for i, t in enumerate(vocab.tokens)}
    return model, vocab
