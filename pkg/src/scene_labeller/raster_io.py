"""Reading and writing rasters and integer grids."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .core import RgbImage


def read_image(path) -> RgbImage:
    with Image.open(path) as im:
        return RgbImage(np.asarray(im.convert("RGB")))


def write_png(img: RgbImage, path) -> None:
    Image.fromarray(np.asarray(img.pixels)).save(path, format="PNG")


def write_int_grid(grid: np.ndarray, path) -> None:
    """Whitespace-separated integers, one image row per line."""
    lines = [" ".join(str(v) for v in row) for row in np.asarray(grid).tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def hash_colors(ids: np.ndarray) -> np.ndarray:
    """Deterministic pseudo-random color per integer id, for visualizing segments."""
    h = (np.asarray(ids, dtype=np.uint64) + np.uint64(1)) * np.uint64(0x9E3779B97F4A7C15)
    h ^= h >> np.uint64(29)
    h *= np.uint64(0xBF58476D1CE4E5B9)
    h ^= h >> np.uint64(32)
    rgb = np.stack([(h >> np.uint64(s)) & np.uint64(0xFF) for s in (0, 8, 16)], axis=-1)
    return rgb.astype(np.uint8)
