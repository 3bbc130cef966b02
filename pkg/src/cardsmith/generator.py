"""Character-level card text generation and the classified card bank.

Cards are flattened to one delimited record each — name | mana_cost |
type_line | power_toughness | rules_text — with "|" separating fields and a
newline terminating the record; both characters are escaped wherever they
occur inside field content, and a card's self-references render as the
literal "{this card}". A recurrent network trained on the character stream
samples new records, which are decoded back into fields and tagged with
color and type prediction vectors to form the bank.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .artifacts import file_sha256, load_artifact, save_artifact
from .cards import Card, parse_mana_cost, render_mana_cost
from .corpus import Corpus
from .errors import CardsmithError, ConfigError, LabelSetError
from .prediction import PredictionVector
from .report import EpochStats, TrainReport
from .textenc import classifier_text, mask_self_references
from .training import ensure_finite
from . import text_model

FIELD_SEP = "|"
RECORD_SEP = "\n"
_ESCAPES = {"\\": "\\\\", FIELD_SEP: "\\" + FIELD_SEP, RECORD_SEP: "\\n"}
_UNESCAPES = {"\\": "\\", FIELD_SEP: FIELD_SEP, "n": RECORD_SEP}


@dataclass(frozen=True)
class DecodedFields:
    name: str
    mana_cost: str
    type_line: str
    power_toughness: str
    rules_text: str

    def as_tuple(self) -> tuple[str, str, str, str, str]:
        return (self.name, self.mana_cost, self.type_line, self.power_toughness, self.rules_text)


@dataclass
class GeneratedCard:
    bank_index: int
    raw: str
    decoded: DecodedFields | None
    color_pred: PredictionVector
    type_pred: PredictionVector

    @property
    def malformed(self) -> bool:
        return self.decoded is None


def _escape(field: str) -> str:
    out = []
    for ch in field:
        out.append(_ESCAPES.get(ch, ch))
    return "".join(out)


def _split_record(record: str) -> list[str]:
    """Split on unescaped field separators and unescape the pieces.

    Never raises: a stray trailing backslash stays literal and unknown
    escapes drop the backslash, so arbitrary sampled text always decodes to
    some field list.
    """
    fields: list[str] = []
    buf: list[str] = []
    i = 0
    while i < len(record):
        ch = record[i]
        if ch == "\\" and i + 1 < len(record):
            buf.append(_UNESCAPES.get(record[i + 1], record[i + 1]))
            i += 2
            continue
        if ch == FIELD_SEP:
            fields.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
        i += 1
    fields.append("".join(buf))
    return fields


def encode_card(card: Card) -> str:
    """One delimited record for a card, self-references masked."""
    pt = "/".join(card.power_toughness) if card.power_toughness else ""
    rules = mask_self_references(card.rules_text, card.name)
    fields = (card.name, render_mana_cost(card.mana_cost), card.type_line, pt, rules)
    return FIELD_SEP.join(_escape(f) for f in fields)


def encode_corpus(corpus: Corpus) -> str:
    """Character stream: one encoded record per card, each ending with the
    record terminator. Deterministic given corpus order."""
    return "".join(encode_card(card) + RECORD_SEP for card in corpus.cards)


def decode_card(raw: str) -> DecodedFields | None:
    """Decode one sampled record; None marks it malformed.

    A record is well-formed when it splits into exactly five fields and its
    mana cost field parses.
    """
    fields = _split_record(raw)
    if len(fields) != 5:
        return None
    try:
        parse_mana_cost(fields[1])
    except CardsmithError:
        return None
    return DecodedFields(*fields)


# ---------------------------------------------------------------------------
# Character-level recurrent model


@dataclass
class GeneratorConfig:
    hidden_size: int = 256
    layers: int = 2
    sequence_length: int = 200
    learning_rate: float = 2e-3
    epochs: int = 20
    batch_size: int = 32
    temperature: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.temperature <= 0:
            raise ConfigError(f"temperature must be > 0, got {self.temperature}")
        if self.sequence_length < 2:
            raise ConfigError("sequence_length must be at least 2")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorConfig":
        return cls(**data)


class CharGenerator(nn.Module):
    def __init__(self, vocab_size: int, config: GeneratorConfig):
        super().__init__()
        self.config = config
        self.vocab_size = vocab_size
        self.embedding = nn.Embedding(vocab_size, config.hidden_size)
        self.lstm = nn.LSTM(config.hidden_size, config.hidden_size, num_layers=config.layers, batch_first=True)
        self.out = nn.Linear(config.hidden_size, vocab_size)

    def forward(self, x: torch.Tensor, state=None):
        emb = self.embedding(x)
        output, state = self.lstm(emb, state)
        return self.out(output), state


def _char_table(stream: str) -> list[str]:
    chars = sorted(set(stream))
    if RECORD_SEP not in chars:
        chars.append(RECORD_SEP)
    return chars


def train_generator(config: GeneratorConfig, stream: str) -> tuple[CharGenerator, list[str], TrainReport]:
    """Train the character model on the encoded corpus stream.

    Returns the model, its character table, and a report whose per-epoch
    loss is the character-level cross-entropy in nats.
    """
    if not stream:
        raise ConfigError("generator training stream is empty")
    chars = _char_table(stream)
    index = {c: i for i, c in enumerate(chars)}
    # A leading terminator gives the model the start-of-record context that
    # sampling begins from.
    work = RECORD_SEP + stream
    encoded = np.asarray([index[c] for c in work], dtype=np.int64)

    seq = min(config.sequence_length, len(encoded) - 1)
    starts = list(range(0, len(encoded) - seq, seq)) or [0]
    last = len(encoded) - seq - 1
    if starts[-1] != last:
        starts.append(last)  # final window overlaps instead of wrapping
    windows_in = np.stack([encoded[s : s + seq] for s in starts])
    windows_out = np.stack([encoded[s + 1 : s + seq + 1] for s in starts])

    torch.manual_seed(config.seed)
    model = CharGenerator(len(chars), config)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    loss_fn = nn.CrossEntropyLoss()
    rng = np.random.default_rng(config.seed)
    inputs = torch.from_numpy(windows_in)
    targets = torch.from_numpy(windows_out)

    report = TrainReport(kind="generator", config=config.to_dict())
    n = len(inputs)
    for epoch in range(config.epochs):
        start = time.monotonic()
        model.train()
        perm = rng.permutation(n)
        total = 0.0
        count = 0
        for begin in range(0, n, config.batch_size):
            idx = torch.from_numpy(perm[begin : begin + config.batch_size])
            optimizer.zero_grad()
            logits, _ = model(inputs[idx])
            loss = loss_fn(logits.reshape(-1, len(chars)), targets[idx].reshape(-1))
            loss.backward()
            optimizer.step()
            total += float(loss.item()) * len(idx)
            count += len(idx)
        epoch_loss = total / count
        ensure_finite(epoch_loss, epoch)
        report.epochs.append(EpochStats(epoch, epoch_loss, None, time.monotonic() - start))
    model.eval()
    return model, chars, report


def sample_cards(model: CharGenerator, chars: list[str], count: int,
                 temperature: float = 0.8, seed: int = 0, max_chars: int = 2000) -> list[str]:
    """Sample exactly count raw records, deterministic under (seed,
    temperature, count). Records are returned without their terminator;
    a record hitting max_chars is cut and kept as-is."""
    if count < 1:
        raise ConfigError(f"count must be >= 1, got {count}")
    if temperature < 0:
        raise ConfigError("temperature must be non-negative")
    sep_idx = chars.index(RECORD_SEP)
    gen = torch.Generator().manual_seed(seed)
    model.eval()
    records: list[str] = []
    buf: list[str] = []
    state = None
    current = torch.tensor([[sep_idx]])
    with torch.no_grad():
        while len(records) < count:
            logits, state = model(current, state)
            logits = logits[0, -1].double()
            if temperature <= 1e-6:
                nxt = int(logits.argmax())
            else:
                probs = torch.softmax(logits / temperature, dim=0)
                nxt = int(torch.multinomial(probs, 1, generator=gen))
            if nxt == sep_idx:
                records.append("".join(buf))
                buf = []
            elif len(buf) >= max_chars:
                records.append("".join(buf))
                buf = [chars[nxt]]
            else:
                buf.append(chars[nxt])
            current = torch.tensor([[nxt]])
    return records


def save_generator(model: CharGenerator, chars: list[str], path) -> None:
    save_artifact(path, "generator", model.config.to_dict(), model.state_dict(),
                  chars=chars, vocab_size=model.vocab_size)


def load_generator(path) -> tuple[CharGenerator, list[str]]:
    payload = load_artifact(path, expected_kind="generator")
    config = GeneratorConfig.from_dict(payload["config"])
    model = CharGenerator(payload["vocab_size"], config)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, payload["chars"]


# ---------------------------------------------------------------------------
# Card bank


def build_card_bank(generator_path, count: int, color_model_path, type_model_path,
                    out_path, temperature: float = 0.8, seed: int = 0) -> dict:
    """Sample, decode, and classify count cards into a JSON-lines bank.

    Every entry carries both prediction vectors; malformed records are
    retained and flagged, and the malformed rate lands in the sidecar
    manifest. Idempotent for fixed seeds: rebuilding writes identical bytes.
    """
    model, chars = load_generator(generator_path)
    color_model, color_vocab = text_model.load_text_model(color_model_path)
    type_model, type_vocab = text_model.load_text_model(type_model_path)
    if color_model.config.label_set != "color":
        raise LabelSetError(f"color model artifact has label set {color_model.config.label_set!r}")
    if type_model.config.label_set != "type":
        raise LabelSetError(f"type model artifact has label set {type_model.config.label_set!r}")

    raws = sample_cards(model, chars, count, temperature=temperature, seed=seed)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    malformed = 0
    with out_path.open("w", encoding="utf-8") as fh:
        for i, raw in enumerate(raws):
            decoded = decode_card(raw)
            if decoded is None:
                malformed += 1
                text = raw
            else:
                text = classifier_text(decoded.type_line, decoded.rules_text)
            color_pred = text_model.predict_text(color_model, color_vocab, text)
            type_pred = text_model.predict_text(type_model, type_vocab, text)
            entry = {
                "bank_index": i,
                "raw": raw,
                "decoded": asdict(decoded) if decoded else None,
                "color_pred": color_pred.as_dict(),
                "type_pred": type_pred.as_dict(),
                "malformed": decoded is None,
            }
            fh.write(json.dumps(entry, ensure_ascii=False, separators=(",", ":")) + "\n")
    manifest = {
        "generator_seed": seed,
        "temperature": temperature,
        "count": count,
        "color_model_sha256": file_sha256(color_model_path),
        "type_model_sha256": file_sha256(type_model_path),
        "malformed_rate": malformed / count,
    }
    manifest_path = out_path.with_suffix(out_path.suffix + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=1), encoding="utf-8")
    return manifest
