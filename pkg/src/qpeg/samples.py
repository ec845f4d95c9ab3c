"""Deterministic synthetic test images."""
from __future__ import annotations

from importlib import resources

import numpy as np

from .imageio import ImageGrid, read_pgm, round_half_away

SYNTHETIC_243 = "synthetic243.pgm"


def synthetic_photo(size: int = 243) -> ImageGrid:
    """Photograph-like scene: smooth illumination, a soft disk, a hard edge, fine texture and grain."""
    y, x = np.mgrid[0:size, 0:size] / (size - 1)
    img = 60.0 + 110.0 * x * (1.0 - 0.4 * y) + 25.0 * np.sin(2.3 * np.pi * y) * np.cos(1.3 * np.pi * x)
    disk = np.hypot(x - 0.62, y - 0.38)
    img += 55.0 * np.exp(-((disk / 0.18) ** 4))
    img = np.where(y > 0.78 - 0.15 * x, img * 0.55 + 20.0, img)
    img += 9.0 * np.sin(2 * np.pi * (x * size) / 6.5) * np.sin(2 * np.pi * (y * size) / 9.0)
    img += 5.0 * np.cos(2 * np.pi * (x + 2 * y) * size / 17.0)
    grain = np.random.default_rng(243).standard_normal((size, size))
    img += 6.0 * (grain + np.roll(grain, 1, axis=1)) / np.sqrt(2.0)
    return ImageGrid(round_half_away(np.clip(img, 0, 255)).astype(np.uint8))


def load_synthetic_243() -> ImageGrid:
    """The bundled 243x243 benchmark image (same pixels as ``synthetic_photo(243)``)."""
    data = resources.files("qpeg").joinpath("data", SYNTHETIC_243).read_bytes()
    return read_pgm(data)


def gradient(size: int) -> ImageGrid:
    y, x = np.mgrid[0:size, 0:size]
    return ImageGrid(((x + y) * 255 // max(1, 2 * (size - 1))).astype(np.uint8))


def quadrants(size: int, levels=(30, 90, 160, 230)) -> ImageGrid:
    half = size // 2
    img = np.empty((size, size), dtype=np.uint8)
    img[:half, :half], img[:half, half:], img[half:, :half], img[half:, half:] = levels
    return ImageGrid(img)
