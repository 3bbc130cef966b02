"""Corpus loading, rejects reporting, and distribution statistics.

Input is either a CSV with header (name, manaCost, type, text, flavor,
power, toughness, set, imageUrl, id) or a JSON array of objects with the
same keys. A previously ingested corpus (JSON object with a "cards" key)
also loads, so pipeline stages can reuse parsed output.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

from .cards import (
    COLOR_LETTERS,
    MAIN_TYPE_WORDS,
    Card,
    derive_color_identity,
    main_types,
    parse_mana_cost,
    parse_type_line,
    render_mana_cost,
)
from .errors import CardsmithError, CorpusLoadError

CSV_COLUMNS = ("name", "manaCost", "type", "text", "flavor", "power", "toughness", "set", "imageUrl", "id")


@dataclass(frozen=True)
class Reject:
    row: int
    field: str
    reason: str

    def line(self) -> str:
        return f"{self.row}\t{self.field}\t{self.reason}"


@dataclass
class Corpus:
    cards: list[Card]
    source_manifest: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.cards)

    def by_id(self) -> dict[str, Card]:
        return {c.id: c for c in self.cards}


@dataclass
class CorpusLoad:
    corpus: Corpus
    rejects: list[Reject]


def _card_from_record(record: dict, row: int, seen_ids: set[str]) -> Card | Reject:
    name = (record.get("name") or "").strip()
    if not name:
        return Reject(row, "name", "empty name")
    card_id = str(record.get("id") or "").strip()
    if not card_id:
        return Reject(row, "id", "empty id")
    if card_id in seen_ids:
        return Reject(row, "id", f"duplicate id {card_id}")
    try:
        mana = parse_mana_cost(record.get("manaCost") or "")
    except CardsmithError as exc:
        return Reject(row, "manaCost", str(exc))
    type_line = (record.get("type") or "").strip()
    rules_text = record.get("text") or ""
    power = (record.get("power") or "").strip()
    toughness = (record.get("toughness") or "").strip()
    pt = (power, toughness) if power or toughness else None
    flavor = record.get("flavor") or None
    return Card(
        id=card_id,
        name=name,
        mana_cost=mana,
        type_line=type_line,
        types=parse_type_line(type_line),
        rules_text=rules_text,
        color_identity=derive_color_identity(mana, rules_text),
        flavor_text=flavor,
        power_toughness=pt,
        set_code=(record.get("set") or "").strip(),
        image_ref=(record.get("imageUrl") or "").strip(),
    )


def _records_from_csv(path: Path) -> list[dict]:
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in ("name", "manaCost", "type", "text", "id") if c not in header]
        if missing:
            raise CorpusLoadError(f"{path}: missing mandatory columns: {', '.join(missing)}")
        return list(reader)


def _records_from_json(path: Path) -> list[dict]:
    with path.open(encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "cards" in data:
        data = data["cards"]
    if not isinstance(data, list):
        raise CorpusLoadError(f"{path}: expected a JSON array of card objects")
    return data


def load_corpus(path: str | Path, format: str | None = None) -> CorpusLoad:
    """Load and parse a corpus file, collecting bad rows as rejects.

    Rows with unparseable mandatory fields are reported, never silently
    dropped. Loading is deterministic: same bytes, same Corpus contents
    and ordering.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusLoadError(f"corpus file not found: {path}")
    fmt = format or ("csv" if path.suffix.lower() == ".csv" else "json" if path.suffix.lower() == ".json" else "")
    if fmt == "csv":
        records = _records_from_csv(path)
    elif fmt == "json":
        records = _records_from_json(path)
    else:
        raise CorpusLoadError(f"unknown corpus format {format or path.suffix!r}")

    cards: list[Card] = []
    rejects: list[Reject] = []
    seen: set[str] = set()
    for row, record in enumerate(records, start=1):
        if not isinstance(record, dict):
            rejects.append(Reject(row, "*", "record is not an object"))
            continue
        result = _card_from_record(record, row, seen)
        if isinstance(result, Reject):
            rejects.append(result)
        else:
            seen.add(result.id)
            cards.append(result)
    manifest = {"path": str(path), "format": fmt, "rows": len(records), "rejects": len(rejects)}
    return CorpusLoad(Corpus(cards, manifest), rejects)


def write_rejects_report(rejects: list[Reject], path: str | Path) -> None:
    """One line per reject: row number, field, reason (tab-separated)."""
    Path(path).write_text("".join(r.line() + "\n" for r in rejects), encoding="utf-8")


def card_to_record(card: Card) -> dict:
    power, toughness = card.power_toughness if card.power_toughness else ("", "")
    return {
        "name": card.name,
        "manaCost": render_mana_cost(card.mana_cost),
        "type": card.type_line,
        "text": card.rules_text,
        "flavor": card.flavor_text or "",
        "power": power,
        "toughness": toughness,
        "set": card.set_code,
        "imageUrl": card.image_ref,
        "id": card.id,
    }


def save_corpus(load: CorpusLoad, path: str | Path) -> None:
    """Persist a parsed corpus as JSON for downstream pipeline stages."""
    payload = {
        "source_manifest": load.corpus.source_manifest,
        "cards": [card_to_record(c) for c in load.corpus.cards],
    }
    Path(path).write_text(json.dumps(payload, indent=1), encoding="utf-8")


# ---------------------------------------------------------------------------
# Distribution statistics


def _all_color_subsets() -> list[str]:
    keys = []
    for r in range(0, 6):
        for combo in combinations(COLOR_LETTERS, r):
            keys.append("".join(combo) if combo else "Cl")
    return keys


@dataclass
class CorpusStats:
    total: int
    color_counts: dict[str, int]          # all 32 identity subsets, keyed W..WUBRG order
    type_counts: dict[str, int]           # exact raw main-type combinations observed
    multicolored_count: int

    @property
    def multicolored_percent(self) -> float:
        return 100.0 * self.multicolored_count / self.total if self.total else 0.0

    def rows(self) -> list[tuple[str, int, float]]:
        """(category, count, percent) rows, each section sorted descending."""
        out = []
        for key, count in sorted(self.color_counts.items(), key=lambda kv: (-kv[1], kv[0])):
            out.append((f"color/{key}", count, 100.0 * count / self.total if self.total else 0.0))
        for key, count in sorted(self.type_counts.items(), key=lambda kv: (-kv[1], kv[0])):
            out.append((f"type/{key}", count, 100.0 * count / self.total if self.total else 0.0))
        out.append(("multicolored", self.multicolored_count, self.multicolored_percent))
        return out


def _type_combo_key(words: frozenset[str]) -> str:
    order = {w: i for i, w in enumerate(MAIN_TYPE_WORDS)}
    return "/".join(sorted(words, key=lambda w: order[w])) if words else "None"


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Count cards per exact color-identity subset and per exact type combination.

    Type counts use raw main types (Instant and Sorcery separate,
    Planeswalker included) so they are auditable against published
    distribution tables; the merged training label set is a separate concern.
    """
    color_counts = {k: 0 for k in _all_color_subsets()}
    type_counts: dict[str, int] = {}
    multi = 0
    for card in corpus.cards:
        color_counts[card.color_identity.key()] += 1
        if card.color_identity.is_multicolored:
            multi += 1
        key = _type_combo_key(main_types(card.type_line))
        type_counts[key] = type_counts.get(key, 0) + 1
    return CorpusStats(len(corpus.cards), color_counts, type_counts, multi)


def write_stats_csv(stats: CorpusStats, path: str | Path) -> None:
    """Stats report: CSV with columns (category, count, percent)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["category", "count", "percent"])
        for category, count, percent in stats.rows():
            writer.writerow([category, count, f"{percent:.2f}"])


def format_stats_table(stats: CorpusStats) -> str:
    lines = [f"{'category':<28}{'count':>8}  percent"]
    for category, count, percent in stats.rows():
        if count == 0 and category.startswith("color/"):
            continue
        lines.append(f"{category:<28}{count:>8}  {percent:6.2f}%")
    lines.append(f"{'total':<28}{stats.total:>8}")
    return "\n".join(lines)
