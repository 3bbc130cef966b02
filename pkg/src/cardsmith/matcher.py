"""Select the generated card whose prediction vectors sit closest to a query.

The color distance and type distance are L1 sums over the respective label
sets; the winner minimizes their weighted sum (ties broken by lower bank
index), which an exhaustive scan over the bank computes exactly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, MatchError
from .generator import DecodedFields
from .prediction import PredictionVector, label_distance, normalize


@dataclass
class BankEntry:
    bank_index: int
    raw: str
    decoded: DecodedFields | None
    color_pred: PredictionVector
    type_pred: PredictionVector
    malformed: bool


@dataclass
class MatchQuery:
    color_pred: PredictionVector
    type_pred: PredictionVector
    weights: tuple[float, float] = (1.0, 1.0)
    k: int = 1

    def __post_init__(self):
        w_color, w_type = self.weights
        if w_color < 0 or w_type < 0 or (w_color == 0 and w_type == 0):
            raise ConfigError(f"weights must be non-negative and not both zero: {self.weights}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")


@dataclass
class MatchResult:
    bank_index: int
    color_distance: float
    type_distance: float
    score: float
    raw: str


def load_bank(path: str | Path) -> list[BankEntry]:
    path = Path(path)
    if not path.exists():
        raise MatchError(f"bank file not found: {path}")
    entries: list[BankEntry] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
            decoded = DecodedFields(**data["decoded"]) if data.get("decoded") else None
            entries.append(BankEntry(
                bank_index=data["bank_index"],
                raw=data["raw"],
                decoded=decoded,
                color_pred=normalize(data["color_pred"]),
                type_pred=normalize(data["type_pred"]),
                malformed=data["malformed"],
            ))
        except (ValueError, KeyError, TypeError) as exc:
            raise MatchError(f"{path}:{lineno}: bad bank entry: {exc}") from exc
    return entries


def match(query: MatchQuery, bank: list[BankEntry], include_malformed: bool = False) -> list[MatchResult]:
    """The k bank entries minimizing w_color*C_d + w_type*T_d.

    Both query vectors are re-normalized first (idempotent on well-formed
    input), malformed entries are skipped unless included, and the result
    equals an exhaustive scan by construction.
    """
    entries = bank if include_malformed else [e for e in bank if not e.malformed]
    if not entries:
        raise MatchError("bank has no matchable entries (all malformed or empty)")
    w_color, w_type = query.weights
    q_color = normalize(query.color_pred.as_dict())
    q_type = normalize(query.type_pred.as_dict())
    results = []
    for entry in entries:
        c_d = label_distance(q_color, entry.color_pred)
        t_d = label_distance(q_type, entry.type_pred)
        results.append(MatchResult(entry.bank_index, c_d, t_d, w_color * c_d + w_type * t_d, entry.raw))
    results.sort(key=lambda r: (r.score, r.bank_index))
    return results[: query.k]


def query_digest(query: MatchQuery) -> str:
    buf = np.concatenate([query.color_pred.as_array(), query.type_pred.as_array(),
                          np.asarray(query.weights, dtype=np.float64)])
    return hashlib.sha256(buf.tobytes()).hexdigest()[:16]


def match_output(query: MatchQuery, results: list[MatchResult]) -> dict:
    """The JSON payload for a match run: query digest plus result rows."""
    return {
        "query_digest": query_digest(query),
        "results": [
            {"bank_index": r.bank_index, "C_d": r.color_distance, "T_d": r.type_distance,
             "score": r.score, "raw": r.raw}
            for r in results
        ],
    }


def render_entry(entry: BankEntry, result: MatchResult) -> str:
    """Human-readable card block for one match result."""
    lines = [
        f"match: bank #{result.bank_index}  score={result.score:.4f}  "
        f"(color distance {result.color_distance:.4f}, type distance {result.type_distance:.4f})"
    ]
    if entry.decoded:
        d = entry.decoded
        header = d.name.strip() or "(unnamed)"
        if d.mana_cost:
            header += f"  {d.mana_cost}"
        lines.append(header)
        if d.type_line:
            lines.append(d.type_line)
        if d.rules_text:
            lines.append(d.rules_text)
        if d.power_toughness:
            lines.append(f"P/T: {d.power_toughness}")
    else:
        lines.append(f"(malformed record) {entry.raw}")
    color_label = entry.color_pred.argmax_label()
    type_label = entry.type_pred.argmax_label()
    lines.append(f"color argmax: {color_label} ({100 * entry.color_pred.as_dict()[color_label]:.2f}%)")
    lines.append(f"type argmax: {type_label} ({100 * entry.type_pred.as_dict()[type_label]:.2f}%)")
    return "\n".join(lines)
