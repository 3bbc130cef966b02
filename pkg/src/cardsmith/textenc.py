"""Word-level text tokenization, vocabulary, and fixed-length encoding.

Tokens are lowercased words; brace-delimited symbols ("{3g}", "{w/u}",
"{this card}") stay atomic so mana notation survives tokenization. Index 0
is the PAD sentinel, index 1 is UNK.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

PAD_INDEX = 0
UNK_INDEX = 1
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
NAME_TOKEN = "{this card}"

# Symbol tokens first so "{3g}" never splits; then P/T modifiers; then words.
_TOKEN_RE = re.compile(r"\{[^{}]*\}|[+-]?\d+/[+-]?\d+|[a-z0-9]+(?:'[a-z]+)?")


@dataclass
class TextSample:
    token_ids: np.ndarray  # int64, length max_len, padded with 0
    label_id: int
    card_id: str


def mask_self_references(text: str, name: str) -> str:
    """Replace occurrences of the card's own name with the NAME placeholder."""
    if not name:
        return text
    return re.sub(re.escape(name), NAME_TOKEN, text, flags=re.IGNORECASE)


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


class Vocabulary:
    """Token-to-index map with reserved PAD (0) and UNK (1) sentinels."""

    def __init__(self, tokens: Sequence[str]):
        self.tokens = [PAD_TOKEN, UNK_TOKEN] + list(tokens)
        self.index = {t: i for i, t in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def get(self, token: str) -> int:
        return self.index.get(token, UNK_INDEX)

    def save(self, path: str | Path) -> None:
        """Plain text, one token per line; line number is the index."""
        Path(path).write_text("".join(t + "\n" for t in self.tokens), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        vocab = cls.__new__(cls)
        vocab.tokens = lines
        vocab.index = {t: i for i, t in enumerate(lines)}
        return vocab


def build_text_vocab(corpus_texts: Iterable[str], min_count: int = 1) -> Vocabulary:
    """Count tokens across texts and keep those seen at least min_count times.

    Kept tokens are ordered by descending count then lexically, so the
    vocabulary is deterministic for a given corpus.
    """
    counts: Counter[str] = Counter()
    for text in corpus_texts:
        counts.update(tokenize(text))
    kept = [t for t, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])) if c >= min_count]
    return Vocabulary(kept)


def encode_text(text: str, vocab: Vocabulary, max_len: int) -> np.ndarray:
    """Encode text to exactly max_len token ids (truncate, pad with 0)."""
    ids = [vocab.get(t) for t in tokenize(text)][:max_len]
    out = np.zeros(max_len, dtype=np.int64)
    out[: len(ids)] = ids
    return out


def classifier_text(type_line: str, rules_text: str, name: str = "") -> str:
    """The classifier's input view of a card: type line plus rules text,
    with the card's own name masked."""
    joined = f"{type_line}\n{rules_text}".strip()
    return mask_self_references(joined, name)
