"""cardsmith: trading-card corpus analysis and generation pipeline.

Parse a card corpus, build labeled image/text datasets with multilabel
duplication, train CNN classifiers for color identity and card type, train
a character-level card text generator, and match input images to the
generated card whose prediction vectors sit closest.
"""

__version__ = "0.1.0"

from .cards import (  # noqa: F401
    Card,
    ColorIdentity,
    ColorLabel,
    ManaSymbol,
    TypeLabel,
    derive_color_identity,
    parse_mana_cost,
    parse_type_line,
)
from .corpus import Corpus, corpus_stats, load_corpus  # noqa: F401
from .prediction import PredictionVector, label_distance, normalize  # noqa: F401
