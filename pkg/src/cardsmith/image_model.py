"""Convolutional classifier for card illustrations.

One architecture, instantiable with either the 6-color or 5-type label set:
CONV -> POOL -> NORM -> CONV -> NORM -> POOL -> FULLY -> SOFTMAX, with 5x5
convolutions (64 maps), 3x3/stride-2 max pooling, local response
normalization, and a 192-wide fully connected layer. The softmax stage is
realized as log-softmax inside the training loss and as softmax in
predict(), which always emits a normalized PredictionVector.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np
import torch
from torch import nn

from .artifacts import load_artifact, save_artifact
from .batches import BatchSet, load_arrays
from .errors import ConfigError, DivergenceError, LabelSetError
from .prediction import PredictionVector, from_probabilities, labels_for
from .report import EpochStats, TrainReport
from .training import PlateauDecay, canonical_order, ensure_finite, per_card_accuracy
from . import datasets


@dataclass
class CNNConfig:
    label_set: str = "color"            # "color" (6 labels) or "type" (5)
    height: int = 32
    width: int = 32
    conv_channels: tuple[int, int] = (64, 64)
    filter_size: int = 5
    pool_size: int = 3
    pool_stride: int = 2
    norm_radius: int = 4
    fc_width: int = 192
    learning_rate: float = 0.01
    momentum: float = 0.9
    lr_decay: float = 0.1
    plateau_epochs: int = 3
    epochs: int = 30
    batch_size: int = 128
    seed: int = 0
    label_count_override: int | None = None

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if isinstance(self.conv_channels, list):
            self.conv_channels = tuple(self.conv_channels)

    @property
    def label_count(self) -> int:
        if self.label_count_override is not None:
            return self.label_count_override
        return len(labels_for(self.label_set))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "CNNConfig":
        return cls(**data)


def _pooled_size(size: int, kernel: int, stride: int) -> int:
    return (size + 2 * (kernel // 2) - kernel) // stride + 1


class CardImageCNN(nn.Module):
    def __init__(self, config: CNNConfig):
        super().__init__()
        c1, c2 = config.conv_channels
        k = config.filter_size
        lrn_size = 2 * config.norm_radius + 1
        self.config = config
        self.conv1 = nn.Conv2d(3, c1, k, stride=1, padding=k // 2)
        self.pool = nn.MaxPool2d(config.pool_size, stride=config.pool_stride, padding=config.pool_size // 2)
        self.norm = nn.LocalResponseNorm(lrn_size, alpha=1e-3, beta=0.75, k=1.0)
        self.conv2 = nn.Conv2d(c1, c2, k, stride=1, padding=k // 2)
        reduced_h = config.height
        reduced_w = config.width
        for _ in range(2):
            reduced_h = _pooled_size(reduced_h, config.pool_size, config.pool_stride)
            reduced_w = _pooled_size(reduced_w, config.pool_size, config.pool_stride)
        self.fc = nn.Linear(c2 * reduced_h * reduced_w, config.fc_width)
        self.out = nn.Linear(config.fc_width, config.label_count)
        self._init_weights()

    def _init_weights(self):
        for conv in (self.conv1, self.conv2):
            nn.init.normal_(conv.weight, mean=0.0, std=0.01)
            nn.init.zeros_(conv.bias)
        for fc in (self.fc, self.out):
            nn.init.normal_(fc.weight, mean=0.0, std=0.1)
            nn.init.zeros_(fc.bias)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Logits; the softmax stage lives in the loss and in predict()."""
        x = torch.relu(self.conv1(x))
        x = self.pool(x)
        x = self.norm(x)
        x = torch.relu(self.conv2(x))
        x = self.norm(x)
        x = self.pool(x)
        x = torch.relu(self.fc(x.flatten(1)))
        return self.out(x)


def _to_input_tensor(pixels: np.ndarray) -> torch.Tensor:
    # (N, H, W, 3) uint8 -> (N, 3, H, W) float32 in [0, 1]
    return torch.from_numpy(pixels.astype(np.float32) / 255.0).permute(0, 3, 1, 2).contiguous()


def _check_batchset(config: CNNConfig, batch_set: BatchSet, role: str) -> None:
    if (batch_set.height, batch_set.width) != (config.height, config.width):
        raise ConfigError(
            f"{role} batch dimensions {batch_set.height}x{batch_set.width} "
            f"do not match config {config.height}x{config.width}")
    if batch_set.label_set != config.label_set:
        raise LabelSetError(f"{role} label set {batch_set.label_set!r} does not match config {config.label_set!r}")


def train(config: CNNConfig, train_set: BatchSet, eval_set: BatchSet) -> tuple[CardImageCNN, TrainReport]:
    """Train on a batch set, evaluating per-card accuracy each epoch.

    Deterministic under config.seed on one device; a non-finite loss aborts
    with DivergenceError instead of continuing.
    """
    _check_batchset(config, train_set, "train")
    _check_batchset(config, eval_set, "eval")
    pixels, labels, card_ids = load_arrays(train_set)
    if len(labels) == 0:
        raise ConfigError("training batch set is empty")
    order = canonical_order(card_ids, labels, pixels)
    pixels, labels = pixels[order], labels[order]
    card_ids = [card_ids[i] for i in order]

    eval_pixels, eval_labels, eval_card_ids = load_arrays(eval_set)
    if len(eval_labels) == 0:
        raise ConfigError("eval batch set is empty")
    truth = datasets.true_label_sets(list(zip(eval_card_ids, (int(l) for l in eval_labels))))

    torch.manual_seed(config.seed)
    model = CardImageCNN(config)
    optimizer = torch.optim.SGD(model.parameters(), lr=config.learning_rate, momentum=config.momentum)
    scheduler = PlateauDecay(optimizer, patience=config.plateau_epochs, factor=config.lr_decay)
    loss_fn = nn.CrossEntropyLoss()
    inputs = _to_input_tensor(pixels)
    targets = torch.from_numpy(labels)
    eval_inputs = _to_input_tensor(eval_pixels)
    rng = np.random.default_rng(config.seed)

    report = TrainReport(kind="image", config=config.to_dict())
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


def _eval_accuracy(model: CardImageCNN, inputs: torch.Tensor, card_ids: list[str],
                   truth: dict[str, set[int]]) -> float:
    model.eval()
    preds = []
    with torch.no_grad():
        for begin in range(0, len(inputs), 512):
            logits = model(inputs[begin : begin + 512])
            preds.append(logits.argmax(dim=1).numpy())
    return per_card_accuracy(card_ids, np.concatenate(preds), truth)


def evaluate(model: CardImageCNN, eval_set: BatchSet, truth: dict[str, set[int]] | None = None) -> float:
    """Per-card accuracy: argmax prediction in the card's true label set.

    Truth defaults to the label sets implied by the eval records themselves.
    """
    pixels, labels, card_ids = load_arrays(eval_set)
    if len(labels) == 0:
        raise ConfigError("eval batch set is empty")
    if truth is None:
        truth = datasets.true_label_sets(list(zip(card_ids, (int(l) for l in labels))))
    return _eval_accuracy(model, _to_input_tensor(pixels), card_ids, truth)


def predict(model: CardImageCNN, pixels: np.ndarray) -> PredictionVector:
    """Prediction vector for one image; deterministic for fixed model and input."""
    config = model.config
    if pixels.shape != (config.height, config.width, 3):
        raise ConfigError(f"input shape {pixels.shape} does not match model {config.height}x{config.width}x3")
    model.eval()
    with torch.no_grad():
        logits = model(_to_input_tensor(pixels[None])).double()
        probs = torch.softmax(logits, dim=1)[0].numpy()
    return from_probabilities(probs, config.label_set)


def save_model(model: CardImageCNN, path) -> None:
    save_artifact(path, "image", model.config.to_dict(), model.state_dict())


def load_model(path) -> CardImageCNN:
    payload = load_artifact(path, expected_kind="image")
    config = CNNConfig.from_dict(payload["config"])
    model = CardImageCNN(config)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model
