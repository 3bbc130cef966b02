"""Training reports (JSON lines) and the figures rendered beside them."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    eval_accuracy: float | None
    wall_time_s: float


@dataclass
class TrainReport:
    kind: str
    config: dict
    epochs: list[EpochStats] = field(default_factory=list)
    final_accuracy: float | None = None

    def deterministic_fields(self) -> dict:
        """Report content that must reproduce under a fixed seed (no wall times)."""
        return {
            "kind": self.kind,
            "losses": [e.train_loss for e in self.epochs],
            "accuracies": [e.eval_accuracy for e in self.epochs],
            "final_accuracy": self.final_accuracy,
        }


def write_report(report: TrainReport, path: str | Path) -> None:
    """One JSON object per epoch, then a trailing summary object carrying the
    config snapshot and final accuracy."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for e in report.epochs:
            fh.write(json.dumps(asdict(e)) + "\n")
        summary = {"kind": report.kind, "final_accuracy": report.final_accuracy, "config": report.config}
        fh.write(json.dumps(summary) + "\n")


def read_report(path: str | Path) -> TrainReport:
    lines = [json.loads(l) for l in Path(path).read_text(encoding="utf-8").splitlines() if l.strip()]
    if not lines or "config" not in lines[-1]:
        raise ValueError(f"{path}: missing summary line")
    summary = lines[-1]
    epochs = [EpochStats(**row) for row in lines[:-1]]
    return TrainReport(kind=summary["kind"], config=summary["config"], epochs=epochs,
                       final_accuracy=summary["final_accuracy"])


def plot_training_curves(report: TrainReport, path: str | Path) -> None:
    """Loss (and eval accuracy when present) against epochs, to a PNG."""
    epochs = [e.epoch for e in report.epochs]
    losses = [e.train_loss for e in report.epochs]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(epochs, losses, marker="o", label="train loss")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    accs = [(e.epoch, e.eval_accuracy) for e in report.epochs if e.eval_accuracy is not None]
    if accs:
        ax2 = ax.twinx()
        ax2.plot([a[0] for a in accs], [a[1] for a in accs], color="tab:green", marker="s", label="eval accuracy")
        ax2.set_ylabel("eval accuracy")
        ax2.set_ylim(0, 1.05)
    ax.set_title(f"{report.kind} training")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_distribution(rows: list[tuple[str, int]], title: str, path: str | Path, max_rows: int = 20) -> None:
    """Horizontal bar chart of (category, count) rows, largest first."""
    rows = [r for r in rows if r[1] > 0][:max_rows]
    names = [r[0] for r in rows][::-1]
    counts = [r[1] for r in rows][::-1]
    fig, ax = plt.subplots(figsize=(6, max(2.5, 0.3 * len(rows) + 1)))
    ax.barh(names, counts, color="tab:blue")
    ax.set_xlabel("cards")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
