import io
import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image
from hypothesis import HealthCheck, settings

from cardsmith.corpus import load_corpus

# Model tests load torch and keep CPU threads warm; absolute draw-time health
# checks misfire under that load.
settings.register_profile("suite", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_corpus_path() -> Path:
    return FIXTURES / "cards.csv"


@pytest.fixture(scope="session")
def fixture_corpus(fixture_corpus_path):
    load = load_corpus(fixture_corpus_path)
    assert not load.rejects
    return load.corpus


def solid_jpeg(rgb: tuple[int, int, int], size: tuple[int, int] = (64, 64), quality: int = 95) -> bytes:
    img = Image.new("RGB", (size[1], size[0]), rgb)
    buf = io.BytesIO()
    img.save(buf, format="JPEG", quality=quality)
    return buf.getvalue()


def gradient_pixels(h: int = 32, w: int = 32, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    base = np.linspace(0, 255, w, dtype=np.uint8)
    pixels = np.stack([np.tile(base, (h, 1))] * 3, axis=2)
    return np.clip(pixels.astype(np.int16) + rng.integers(-20, 20, pixels.shape), 0, 255).astype(np.uint8)


@pytest.fixture(scope="session")
def fixture_images_dir(tmp_path_factory, fixture_corpus) -> Path:
    """One deterministic JPEG per fixture card, keyed <id>.jpg."""
    out = tmp_path_factory.mktemp("card_images")
    rng = np.random.default_rng(99)
    for card in fixture_corpus.cards:
        rgb = tuple(int(v) for v in rng.integers(30, 225, 3))
        (out / f"{card.id}.jpg").write_bytes(solid_jpeg(rgb))
    return out


def tint_dataset(n: int, seed: int, h: int = 32, w: int = 32):
    """Synthetic 6-class images where the class is the dominant tint.

    Returns (pixels uint8 (n,h,w,3), labels int64). Class mapping follows the
    color label order: White, Blue, Black, Red, Green, Colorless.
    """
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 6, n).astype(np.int64)
    pixels = rng.integers(0, 90, (n, h, w, 3)).astype(np.int16)
    for i, lab in enumerate(labels):
        if lab == 0:
            pixels[i] += 150
        elif lab == 1:
            pixels[i, :, :, 2] += 150
        elif lab == 2:
            pixels[i] -= 40
        elif lab == 3:
            pixels[i, :, :, 0] += 150
        elif lab == 4:
            pixels[i, :, :, 1] += 150
        else:
            pixels[i] += 70
    return np.clip(pixels, 0, 255).astype(np.uint8), labels


MARKERS = ("soldier", "wizard", "zombie", "dragon", "elf")
TEMPLATES = (
    "when {m} enters the battlefield, draw a card",
    "target {m} gets +2/+2 until end of turn",
    "whenever a {m} attacks, you gain 1 life",
    "destroy target {m} an opponent controls",
    "{m} creatures you control have vigilance",
    "sacrifice a {m} then each player discards a card",
    "{m} tokens you control get +1/+0 and have haste",
)


def marker_texts(n: int, seed: int):
    """Synthetic 5-class card texts; the class keyword is the only separator."""
    rng = np.random.default_rng(seed)
    texts, labels = [], []
    for _ in range(n):
        lab = int(rng.integers(0, 5))
        template = TEMPLATES[int(rng.integers(0, len(TEMPLATES)))]
        texts.append(template.replace("{m}", MARKERS[lab]))
        labels.append(lab)
    return texts, labels


def write_json_corpus(records: list[dict], path: Path) -> Path:
    path.write_text(json.dumps(records), encoding="utf-8")
    return path


def make_batch_set(directory: Path, pixels: np.ndarray, labels: np.ndarray,
                   card_ids: list[str] | None = None, label_set: str = "color", seed: int = 0):
    from cardsmith.batches import write_batches
    from cardsmith.images import ImageSample

    if card_ids is None:
        card_ids = [f"card{i:05d}" for i in range(len(labels))]
    samples = [ImageSample(pixels=pixels[i], label_id=int(labels[i]), card_id=card_ids[i])
               for i in range(len(labels))]
    return write_batches(samples, directory, label_set=label_set, seed=seed)


def train_fixture_text_model(corpus, label_set: str, out_path: Path, epochs: int = 2, seed: int = 0):
    from cardsmith.datasets import SplitSpec, expand_multilabel, split
    from cardsmith.text_model import TextCNNConfig, save_text_model, train_text
    from cardsmith.textenc import TextSample, build_text_vocab, classifier_text, encode_text

    texts = {c.id: classifier_text(c.type_line, c.rules_text, c.name) for c in corpus.cards}
    vocab = build_text_vocab(texts.values())
    pairs = expand_multilabel(corpus, label_set)
    samples = [TextSample(encode_text(texts[cid], vocab, 64), lab, cid) for cid, lab in pairs]
    train_s, eval_s = split(samples, SplitSpec(5 / 6, seed=seed))
    config = TextCNNConfig(label_set=label_set, vocab_size=len(vocab), max_len=64,
                           epochs=epochs, batch_size=8, seed=seed)
    model, _ = train_text(config, train_s, eval_s)
    save_text_model(model, vocab, out_path)
    return out_path


@pytest.fixture(scope="session")
def pipeline_artifacts(tmp_path_factory, fixture_corpus):
    """Generator + text classifier artifacts and a small bank, shared by
    integration tests that only need plausible trained models."""
    from cardsmith.generator import (GeneratorConfig, build_card_bank, encode_corpus,
                                     save_generator, train_generator)

    root = tmp_path_factory.mktemp("pipeline")
    color_path = train_fixture_text_model(fixture_corpus, "color", root / "text_color.pt", seed=1)
    type_path = train_fixture_text_model(fixture_corpus, "type", root / "text_type.pt", seed=2)
    stream = encode_corpus(fixture_corpus)
    config = GeneratorConfig(hidden_size=96, layers=1, sequence_length=160,
                             learning_rate=5e-3, epochs=30, batch_size=16, seed=3)
    model, chars, _ = train_generator(config, stream)
    gen_path = root / "generator.pt"
    save_generator(model, chars, gen_path)
    bank_path = root / "bank.jsonl"
    manifest = build_card_bank(gen_path, 30, color_path, type_path, bank_path, temperature=0.7, seed=4)
    return {"root": root, "color_model": color_path, "type_model": type_path,
            "generator": gen_path, "bank": bank_path, "bank_manifest": manifest}
