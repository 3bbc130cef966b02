"""Image decoding, resizing, and crop/displace augmentation.

Pixels are uint8 arrays of shape (H, W, 3). Resizing center-crops to the
target aspect ratio first, then scales; augmentation crops a random window
and shifts it, always returning the original dimensions and label.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import ConfigError, ImageDecodeError


@dataclass
class ImageSample:
    pixels: np.ndarray  # uint8, (H, W, 3)
    label_id: int
    card_id: str


@dataclass(frozen=True)
class AugmentConfig:
    max_crop_margin: int = 4
    max_displacement: int = 4


def decode_and_resize(image_bytes: bytes, target: tuple[int, int] = (32, 32), card_id: str = "") -> np.ndarray:
    """Decode image bytes and return an exactly target-sized (H, W, 3) array.

    Aspect mismatch is handled by center-crop to the target ratio, then
    bilinear scaling. An input already at the target size passes through
    pixel-identical after decode.
    """
    th, tw = target
    if th <= 0 or tw <= 0:
        raise ConfigError(f"bad target dimensions {target}")
    try:
        img = Image.open(io.BytesIO(image_bytes))
        img.load()
    except Exception as exc:
        raise ImageDecodeError(f"undecodable image bytes: {exc}", card_id=card_id) from exc
    img = img.convert("RGB")
    pixels = np.asarray(img, dtype=np.uint8)
    h, w = pixels.shape[:2]
    if (h, w) == (th, tw):
        return pixels
    # Largest centered window matching the target aspect ratio.
    if w * th > h * tw:
        crop_h, crop_w = h, (h * tw) // th
    else:
        crop_h, crop_w = (w * th) // tw, w
    crop_h, crop_w = max(crop_h, 1), max(crop_w, 1)
    top = (h - crop_h) // 2
    left = (w - crop_w) // 2
    window = Image.fromarray(pixels[top : top + crop_h, left : left + crop_w])
    return np.asarray(window.resize((tw, th), Image.BILINEAR), dtype=np.uint8)


def _scale_nearest(pixels: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    h, w = pixels.shape[:2]
    rows = (np.arange(out_h) * h) // out_h
    cols = (np.arange(out_w) * w) // out_w
    return pixels[rows][:, cols]


def augment(sample: ImageSample, rng_seed: int, config: AugmentConfig = AugmentConfig()) -> ImageSample:
    """Random crop-and-scale-back plus edge-replicated displacement.

    Same seed gives bit-identical output; a zero config is the identity.
    Label and dimensions never change.
    """
    h, w = sample.pixels.shape[:2]
    m = config.max_crop_margin
    d = config.max_displacement
    if m < 0 or d < 0:
        raise ConfigError("augmentation magnitudes must be non-negative")
    if m >= min(h, w) / 2:
        raise ConfigError(f"crop margin {m} too large for {h}x{w} image")
    pixels = sample.pixels
    rng = np.random.default_rng(rng_seed)
    if m > 0:
        oy = int(rng.integers(0, 2 * m + 1))
        ox = int(rng.integers(0, 2 * m + 1))
        window = pixels[oy : oy + h - 2 * m, ox : ox + w - 2 * m]
        pixels = _scale_nearest(window, h, w)
    if d > 0:
        dy = int(rng.integers(-d, d + 1))
        dx = int(rng.integers(-d, d + 1))
        padded = np.pad(pixels, ((d, d), (d, d), (0, 0)), mode="edge")
        pixels = padded[d + dy : d + dy + h, d + dx : d + dx + w]
    if m == 0 and d == 0:
        pixels = pixels.copy()
    return ImageSample(pixels=pixels, label_id=sample.label_id, card_id=sample.card_id)
