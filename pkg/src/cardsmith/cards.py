"""Card domain types: mana symbols, color identity, type labels, and parsing.

A card's color identity is the set of color letters (W, U, B, R, G) that
appear as brace-delimited symbols anywhere on the card: in its mana cost or
inside symbol tokens in its rules text. The empty set is Colorless.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import ManaCostError

COLOR_LETTERS = "WUBRG"

# Canonical label orderings; prediction vectors and label ids follow these.
COLOR_LABELS = ("White", "Blue", "Black", "Red", "Green", "Colorless")
TYPE_LABELS = ("Creature", "Artifact", "Enchantment", "InstantSorcery", "Land")

LETTER_TO_COLOR = {
    "W": "White",
    "U": "Blue",
    "B": "Black",
    "R": "Red",
    "G": "Green",
}

# Main type words recognized on a type line, in report order. Everything
# else on the left of the dash (supertypes like Legendary, Snow) is ignored.
MAIN_TYPE_WORDS = ("Creature", "Instant", "Sorcery", "Enchantment", "Land", "Artifact", "Planeswalker")

# Training label set merges Instant and Sorcery; Planeswalker is excluded.
_TYPE_WORD_TO_LABEL = {
    "Creature": "Creature",
    "Artifact": "Artifact",
    "Enchantment": "Enchantment",
    "Instant": "InstantSorcery",
    "Sorcery": "InstantSorcery",
    "Land": "Land",
}

_SYMBOL_RE = re.compile(r"\{([^{}]*)\}")


class ColorLabel(Enum):
    White = 0
    Blue = 1
    Black = 2
    Red = 3
    Green = 4
    Colorless = 5


class TypeLabel(Enum):
    Creature = 0
    Artifact = 1
    Enchantment = 2
    InstantSorcery = 3
    Land = 4


@dataclass(frozen=True)
class ManaSymbol:
    """One brace-delimited mana cost token.

    kind is one of generic, colored, hybrid, variable, other. raw keeps the
    token's inner text so rendering reproduces the original spelling.
    """

    kind: str
    colors: frozenset[str] = frozenset()
    numeric_value: int | None = None
    raw: str = ""

    def __post_init__(self):
        if self.kind == "colored" and len(self.colors) != 1:
            raise ValueError("colored symbol must carry exactly one color")
        if self.kind == "hybrid" and len(self.colors) != 2:
            raise ValueError("hybrid symbol must carry exactly two distinct colors")
        if self.kind == "generic":
            if self.colors:
                raise ValueError("generic symbol carries no colors")
            if self.numeric_value is None or self.numeric_value < 0:
                raise ValueError("generic symbol needs numeric_value >= 0")
        if not self.colors <= frozenset(COLOR_LETTERS):
            raise ValueError(f"unknown color letters: {self.colors}")


@dataclass(frozen=True)
class ColorIdentity:
    """Subset of {W,U,B,R,G}; empty means Colorless."""

    colors: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.colors <= frozenset(COLOR_LETTERS):
            raise ValueError(f"unknown color letters: {self.colors}")

    @property
    def bits(self) -> tuple[int, int, int, int, int]:
        return tuple(1 if c in self.colors else 0 for c in COLOR_LETTERS)

    @property
    def is_multicolored(self) -> bool:
        return len(self.colors) >= 2

    def key(self) -> str:
        """Canonical subset name in WUBRG letter order; 'Cl' when empty."""
        if not self.colors:
            return "Cl"
        return "".join(c for c in COLOR_LETTERS if c in self.colors)

    def labels(self) -> list[ColorLabel]:
        """The color labels this identity expands to; [Colorless] when empty."""
        if not self.colors:
            return [ColorLabel.Colorless]
        return [ColorLabel[LETTER_TO_COLOR[c]] for c in COLOR_LETTERS if c in self.colors]


@dataclass(frozen=True)
class Card:
    id: str
    name: str
    mana_cost: tuple[ManaSymbol, ...]
    type_line: str
    types: frozenset[TypeLabel]
    rules_text: str
    color_identity: ColorIdentity
    flavor_text: str | None = None
    power_toughness: tuple[str, str] | None = None
    set_code: str = ""
    image_ref: str = ""


def _classify_token(content: str) -> ManaSymbol:
    letters = frozenset(ch for ch in content if ch in COLOR_LETTERS)
    if content.isdigit():
        return ManaSymbol("generic", frozenset(), int(content), raw=content)
    if content in COLOR_LETTERS:
        return ManaSymbol("colored", frozenset(content), raw=content)
    hybrid = re.fullmatch(r"([WUBRG])/([WUBRG])", content)
    if hybrid and hybrid.group(1) != hybrid.group(2):
        return ManaSymbol("hybrid", letters, raw=content)
    if content in ("X", "Y", "Z"):
        return ManaSymbol("variable", frozenset(), raw=content)
    return ManaSymbol("other", letters, raw=content)


def parse_mana_cost(raw: str) -> tuple[ManaSymbol, ...]:
    """Parse a brace-delimited mana cost like "{2}{W}{U}" into symbols.

    Unrecognized tokens become kind=other, keeping any color letters they
    contain. Unbalanced braces or stray text raise ManaCostError with the
    byte offset of the offending character.
    """
    symbols: list[ManaSymbol] = []
    i = 0
    n = len(raw)
    while i < n:
        ch = raw[i]
        if ch.isspace():
            i += 1
            continue
        if ch != "{":
            raise ManaCostError(f"expected '{{', found {ch!r}", offset=i)
        end = raw.find("}", i + 1)
        inner_open = raw.find("{", i + 1)
        if end == -1:
            raise ManaCostError("unterminated symbol", offset=i)
        if inner_open != -1 and inner_open < end:
            raise ManaCostError("nested '{' inside symbol", offset=inner_open)
        symbols.append(_classify_token(raw[i + 1 : end]))
        i = end + 1
    return tuple(symbols)


def render_mana_cost(symbols: tuple[ManaSymbol, ...] | list[ManaSymbol]) -> str:
    """Inverse of parse_mana_cost for well-formed symbols."""
    return "".join("{" + (s.raw if s.raw else _default_raw(s)) + "}" for s in symbols)


def _default_raw(symbol: ManaSymbol) -> str:
    if symbol.kind == "generic":
        return str(symbol.numeric_value)
    if symbol.kind == "colored":
        return next(iter(symbol.colors))
    if symbol.kind == "hybrid":
        ordered = [c for c in COLOR_LETTERS if c in symbol.colors]
        return f"{ordered[0]}/{ordered[1]}"
    return ""


def rules_text_colors(rules_text: str) -> frozenset[str]:
    """Color letters appearing inside brace-delimited symbols in rules text."""
    found: set[str] = set()
    for match in _SYMBOL_RE.finditer(rules_text):
        found.update(ch for ch in match.group(1) if ch in COLOR_LETTERS)
    return frozenset(found)


def derive_color_identity(mana_cost, rules_text: str) -> ColorIdentity:
    """Union of all color symbols in the mana cost and the rules text."""
    colors: set[str] = set()
    for symbol in mana_cost:
        colors.update(symbol.colors)
    colors.update(rules_text_colors(rules_text))
    return ColorIdentity(frozenset(colors))


def main_types(raw: str) -> frozenset[str]:
    """Raw main type words on a type line, before any merging or exclusion."""
    left = re.split(r"[—–-]", raw, maxsplit=1)[0]
    return frozenset(w for w in left.split() if w in MAIN_TYPE_WORDS)


def parse_type_line(raw: str) -> frozenset[TypeLabel]:
    """Map a type line to training labels.

    Instant and Sorcery merge into InstantSorcery; Planeswalker and
    unrecognized words map to nothing. An empty result flags the card as
    excluded from the type dataset.
    """
    return frozenset(TypeLabel[_TYPE_WORD_TO_LABEL[w]] for w in main_types(raw) if w in _TYPE_WORD_TO_LABEL)


def render_type_line(types: frozenset[TypeLabel]) -> str:
    """Canonical type line for a set of labels; InstantSorcery renders as Instant."""
    back = {"Creature": "Creature", "Artifact": "Artifact", "Enchantment": "Enchantment",
            "InstantSorcery": "Instant", "Land": "Land"}
    order = {w: i for i, w in enumerate(MAIN_TYPE_WORDS)}
    words = sorted((back[t.name] for t in types), key=lambda w: order[w])
    return " ".join(words)
