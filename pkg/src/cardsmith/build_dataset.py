"""Dataset building stage: corpus + image files -> train/eval batch sets."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .corpus import load_corpus
from .datasets import SplitSpec, expand_multilabel, split
from .errors import CardsmithError, ConfigError
from .images import AugmentConfig, ImageSample, augment, decode_and_resize
from .batches import write_batches


def _find_image(images_dir: Path, card_id: str, image_ref: str) -> Path | None:
    for candidate in (image_ref, f"{card_id}.jpg", f"{card_id}.jpeg", f"{card_id}.png"):
        if not candidate:
            continue
        path = images_dir / Path(candidate).name
        if path.exists():
            return path
    return None


def build(corpus_path, corpus_format, images_dir, labeling, out_dir, height, width,
          train_fraction, augment_ratio, crop_margin, displacement,
          records_per_batch, seed) -> str:
    """Expand labels, decode images, split by card, augment the train side,
    and write both batch sets. Returns a one-line summary; cards whose image
    is missing or undecodable are listed in <out>/skipped.txt."""
    images_dir = Path(images_dir)
    if not images_dir.is_dir():
        raise ConfigError(f"images directory not found: {images_dir}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    load = load_corpus(corpus_path, corpus_format)
    cards = load.corpus.by_id()
    pairs = expand_multilabel(load.corpus, labeling)

    pixel_cache: dict[str, np.ndarray] = {}
    skipped: list[str] = []
    samples: list[ImageSample] = []
    for card_id, label_id in pairs:
        if card_id in pixel_cache:
            pixels = pixel_cache[card_id]
        elif card_id in skipped:
            continue
        else:
            path = _find_image(images_dir, card_id, cards[card_id].image_ref)
            if path is None:
                skipped.append(card_id)
                continue
            try:
                pixels = decode_and_resize(path.read_bytes(), (height, width), card_id=card_id)
            except CardsmithError:
                skipped.append(card_id)
                continue
            pixel_cache[card_id] = pixels
        samples.append(ImageSample(pixels=pixels, label_id=label_id, card_id=card_id))

    if not samples:
        raise ConfigError("no usable samples: every card lacked a decodable image")

    spec = SplitSpec(train_fraction=train_fraction, seed=seed)
    train_samples, eval_samples = split(samples, spec)
    if not eval_samples:
        raise ConfigError("eval side is empty; lower --train-fraction or add cards")

    aug_config = AugmentConfig(max_crop_margin=crop_margin, max_displacement=displacement)
    augment_info = {"ratio": augment_ratio, "max_crop_margin": crop_margin, "max_displacement": displacement}
    extras: list[ImageSample] = []
    if augment_ratio > 0 and (crop_margin > 0 or displacement > 0):
        rng = np.random.default_rng(seed)
        n_extra = int(round(augment_ratio * len(train_samples)))
        for i in range(n_extra):
            base = train_samples[i % len(train_samples)]
            extras.append(augment(base, rng_seed=int(rng.integers(0, 2**63 - 1)), config=aug_config))

    write_batches(train_samples + extras, out_dir / "train", labeling, seed=seed,
                  augmentation=augment_info, records_per_batch=records_per_batch)
    write_batches(eval_samples, out_dir / "eval", labeling, seed=seed,
                  augmentation={}, records_per_batch=records_per_batch)
    (out_dir / "skipped.txt").write_text("".join(c + "\n" for c in skipped), encoding="utf-8")

    return (f"dataset ({labeling}) -> {out_dir}: {len(train_samples)} train + {len(extras)} augmented, "
            f"{len(eval_samples)} eval, {len(skipped)} cards skipped")
