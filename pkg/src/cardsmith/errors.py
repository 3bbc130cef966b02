"""Exception types shared across the package."""


class CardsmithError(Exception):
    """Base class for all package errors."""


class ManaCostError(CardsmithError):
    """Malformed mana cost string. Carries the byte offset of the bad character."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class CorpusLoadError(CardsmithError):
    """Corpus file missing, unreadable, or structurally invalid."""


class ImageDecodeError(CardsmithError):
    """Image bytes could not be decoded. Carries the offending card id."""

    def __init__(self, message: str, card_id: str = ""):
        super().__init__(f"{message} (card_id={card_id!r})" if card_id else message)
        self.card_id = card_id


class BatchFormatError(CardsmithError):
    """Batch file failed validation (magic, counts, truncation)."""


class ConfigError(CardsmithError):
    """Invalid configuration value or unknown config key."""


class DivergenceError(CardsmithError):
    """Training produced a non-finite loss."""


class LabelSetError(CardsmithError):
    """Prediction vectors or models disagree on the label set."""


class MatchError(CardsmithError):
    """Matching cannot proceed (e.g. empty effective bank)."""


class FetchError(CardsmithError):
    """Fetch session could not be started (bad config, unwritable output)."""
