import io

import numpy as np
import pytest
from PIL import Image

from cardsmith.errors import ConfigError, ImageDecodeError
from cardsmith.images import AugmentConfig, ImageSample, augment, decode_and_resize

from conftest import gradient_pixels, solid_jpeg


def png_bytes(pixels: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(pixels).save(buf, format="PNG")
    return buf.getvalue()


class TestDecodeAndResize:
    def test_solid_red_downscale(self):
        out = decode_and_resize(solid_jpeg((255, 0, 0), (64, 64)), (32, 32))
        assert out.shape == (32, 32, 3)
        assert out.dtype == np.uint8
        # JPEG tolerance +-8 per channel on a constant image.
        assert np.all(np.abs(out[:, :, 0].astype(int) - 255) <= 8)
        assert np.all(out[:, :, 1].astype(int) <= 8)
        assert np.all(out[:, :, 2].astype(int) <= 8)

    def test_already_target_size_passes_through(self):
        pixels = gradient_pixels(32, 32, seed=5)
        out = decode_and_resize(png_bytes(pixels), (32, 32))
        assert np.array_equal(out, pixels)

    def test_wide_image_center_cropped(self):
        # 100x50: left quarter blue, middle half green, right quarter red.
        pixels = np.zeros((50, 100, 3), dtype=np.uint8)
        pixels[:, :25, 2] = 255
        pixels[:, 25:75, 1] = 255
        pixels[:, 75:, 0] = 255
        out = decode_and_resize(png_bytes(pixels), (32, 32))
        # Corners come from the horizontal middle band; the blue and red
        # margins are cropped away entirely.
        for corner in (out[0, 0], out[0, -1], out[-1, 0], out[-1, -1]):
            assert corner[1] > 200 and corner[0] < 30 and corner[2] < 30
        assert out[:, :, 2].max() < 30
        assert out[:, :, 0].max() < 30

    def test_matches_independent_scaling_tool(self):
        # Oracle: skimage.transform.resize on the same centered crop.
        skimage_transform = pytest.importorskip("skimage.transform")
        pixels = gradient_pixels(50, 100, seed=11)
        out = decode_and_resize(png_bytes(pixels), (32, 32))
        crop = pixels[:, 25:75]  # central 50x50 window
        reference = skimage_transform.resize(crop, (32, 32), preserve_range=True, anti_aliasing=True)
        diff = np.abs(out.astype(float) - reference)
        assert diff.mean() < 12.0

    def test_deterministic(self):
        blob = solid_jpeg((10, 200, 30), (48, 40))
        assert np.array_equal(decode_and_resize(blob, (32, 32)), decode_and_resize(blob, (32, 32)))

    def test_undecodable_bytes_name_the_card(self):
        with pytest.raises(ImageDecodeError) as err:
            decode_and_resize(b"not an image", (32, 32), card_id="c123")
        assert err.value.card_id == "c123"
        assert "c123" in str(err.value)


class TestAugment:
    def sample(self, seed=0):
        return ImageSample(pixels=gradient_pixels(32, 32, seed=seed), label_id=3, card_id="c1")

    def test_zero_config_is_identity(self):
        s = self.sample()
        out = augment(s, rng_seed=9, config=AugmentConfig(0, 0))
        assert np.array_equal(out.pixels, s.pixels)
        assert out.label_id == s.label_id

    def test_same_seed_bit_identical(self):
        s = self.sample()
        a = augment(s, rng_seed=42)
        b = augment(s, rng_seed=42)
        assert np.array_equal(a.pixels, b.pixels)

    def test_adjacent_seeds_differ_on_gradient(self):
        s = self.sample(seed=1)
        a = augment(s, rng_seed=7)
        b = augment(s, rng_seed=8)
        assert not np.array_equal(a.pixels, b.pixels)

    def test_dimensions_and_label_preserved(self):
        s = self.sample()
        out = augment(s, rng_seed=1, config=AugmentConfig(4, 4))
        assert out.pixels.shape == s.pixels.shape
        assert out.label_id == s.label_id
        assert out.card_id == s.card_id

    def test_oversized_margin_rejected(self):
        with pytest.raises(ConfigError):
            augment(self.sample(), rng_seed=0, config=AugmentConfig(max_crop_margin=16, max_displacement=0))

    def test_does_not_mutate_input(self):
        s = self.sample()
        before = s.pixels.copy()
        augment(s, rng_seed=5)
        assert np.array_equal(s.pixels, before)
