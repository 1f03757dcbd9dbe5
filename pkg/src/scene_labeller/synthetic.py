"""Generator for small, separable, five-class textured scene datasets.

Each scene has a sky band on top, tree/building blocks in the middle and
road/grass blocks at the bottom, occasionally with a water patch (mapped to
void). Raw label ids follow the bundled default mapping.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy import ndimage

from .core import RgbImage
from .raster_io import write_int_grid, write_png

RAW_SKY, RAW_TREE, RAW_ROAD, RAW_GRASS, RAW_WATER, RAW_BUILDING = 0, 1, 2, 3, 4, 5


def _sky(rng, h, w):
    t = np.linspace(0, 1, h)[:, None, None]
    top = np.array([120, 170, 235]) + rng.uniform(-10, 10, 3)
    bottom = np.array([190, 220, 250]) + rng.uniform(-5, 5, 3)
    img = top + t * (bottom - top) + rng.normal(0, 1.5, (h, w, 3))
    return np.broadcast_to(img, (h, w, 3))


def _tree(rng, h, w):
    blobs = ndimage.gaussian_filter(rng.normal(0, 1, (h, w)), 2.0)
    blobs /= blobs.std() + 1e-9
    base = np.array([35, 95, 35]) + rng.uniform(-8, 8, 3)
    return base + blobs[..., None] * np.array([12, 30, 12])


def _road(rng, h, w):
    base = np.array([105, 105, 110]) + rng.uniform(-8, 8)
    img = base + rng.normal(0, 10, (h, w, 1))
    yy, xx = np.mgrid[0:h, 0:w]
    dashes = (np.abs(yy - h // 2) < 2) & ((xx // 12) % 2 == 0)
    img = np.broadcast_to(img, (h, w, 3)).copy()
    img[dashes] = 235
    return img


def _grass(rng, h, w):
    stripes = ndimage.gaussian_filter1d(rng.normal(0, 1, (h, w)), 0.8, axis=1)
    stripes = ndimage.gaussian_filter1d(stripes, 4.0, axis=0)
    stripes /= stripes.std() + 1e-9
    base = np.array([125, 185, 55]) + rng.uniform(-8, 8, 3)
    return base + stripes[..., None] * np.array([15, 20, 8])


def _building(rng, h, w):
    base = np.array([160, 75, 55]) + rng.uniform(-10, 10, 3)
    img = np.broadcast_to(base + rng.normal(0, 4, (h, w, 1)), (h, w, 3)).copy()
    step, size = 12, 6
    yy, xx = np.mgrid[0:h, 0:w]
    windows = ((yy % step) >= 3) & ((yy % step) < 3 + size) & ((xx % step) >= 3) & ((xx % step) < 3 + size)
    img[windows] = np.array([40, 45, 60])
    return img


def _water(rng, h, w):
    ripples = ndimage.gaussian_filter(rng.normal(0, 1, (h, w)), 1.5)
    ripples /= ripples.std() + 1e-9
    return np.array([30, 80, 140]) + ripples[..., None] * np.array([5, 10, 15])


_TEXTURES = {RAW_SKY: _sky, RAW_TREE: _tree, RAW_ROAD: _road, RAW_GRASS: _grass,
             RAW_BUILDING: _building, RAW_WATER: _water}


def _fill(img, labels, rng, raw, y0, y1, x0, x1):
    img[y0:y1, x0:x1] = _TEXTURES[raw](rng, y1 - y0, x1 - x0)
    labels[y0:y1, x0:x1] = raw


def generate_scene(rng: np.random.Generator, width: int = 160, height: int = 120):
    """One scene as ``(RgbImage, raw label grid)``."""
    img = np.zeros((height, width, 3))
    labels = np.zeros((height, width), dtype=np.int32)
    sky_h = int(rng.uniform(0.25, 0.4) * height)
    mid_h = int(rng.uniform(0.3, 0.4) * height)
    _fill(img, labels, rng, RAW_SKY, 0, sky_h, 0, width)

    split = int(rng.uniform(0.35, 0.65) * width)
    middle = [RAW_TREE, RAW_BUILDING]
    rng.shuffle(middle)
    _fill(img, labels, rng, middle[0], sky_h, sky_h + mid_h, 0, split)
    _fill(img, labels, rng, middle[1], sky_h, sky_h + mid_h, split, width)

    split = int(rng.uniform(0.35, 0.65) * width)
    bottom = [RAW_ROAD, RAW_GRASS]
    rng.shuffle(bottom)
    _fill(img, labels, rng, bottom[0], sky_h + mid_h, height, 0, split)
    _fill(img, labels, rng, bottom[1], sky_h + mid_h, height, split, width)

    if rng.random() < 0.3:
        pw, ph = width // 6, (height - sky_h - mid_h) // 3
        px, py = int(rng.integers(0, width - pw)), height - ph
        _fill(img, labels, rng, RAW_WATER, py, height, px, px + pw)
    return RgbImage(np.clip(np.rint(img), 0, 255).astype(np.uint8)), labels


def generate_dataset(root, n_images: int = 60, seed: int = 0, width: int = 160, height: int = 120) -> Path:
    """Write ``images/scene_NNN.png`` and ``labels/scene_NNN.txt`` under ``root``."""
    root = Path(root)
    (root / "images").mkdir(parents=True, exist_ok=True)
    (root / "labels").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    for i in range(n_images):
        img, labels = generate_scene(rng, width, height)
        write_png(img, root / "images" / f"scene_{i:03d}.png")
        write_int_grid(labels, root / "labels" / f"scene_{i:03d}.txt")
    return root
