"""Raster, partition and class-label types shared by all stages."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatch


class ClassId(IntEnum):
    SKY = 0
    TREE = 1
    ROAD = 2
    GRASS = 3
    BUILDING = 4
    # unlabelled / excluded pixels; never produced by the classifier
    VOID = -1

    @classmethod
    def from_name(cls, name: str) -> "ClassId":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown class name {name!r}") from None


SEMANTIC_CLASSES = (ClassId.SKY, ClassId.TREE, ClassId.ROAD, ClassId.GRASS, ClassId.BUILDING)
N_CLASSES = len(SEMANTIC_CLASSES)
CLASS_NAMES = tuple(c.name.lower() for c in SEMANTIC_CLASSES)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class RgbImage:
    """8-bit RGB raster stored as a read-only ``(height, width, 3)`` array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise DimensionMismatch(f"expected (h, w, 3) pixels, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise DimensionMismatch("image must be at least 1x1")
        if px.dtype != np.uint8:
            if np.any(px < 0) or np.any(px > 255):
                raise ValueError("pixel values must lie in [0, 255]")
            px = px.astype(np.uint8)
        object.__setattr__(self, "pixels", _frozen(px))

    @classmethod
    def from_flat(cls, width: int, height: int, rgb) -> "RgbImage":
        """Build from a row-major sequence of ``(r, g, b)`` triples."""
        arr = np.asarray(rgb, dtype=np.int64)
        if arr.size != width * height * 3:
            raise DimensionMismatch(
                f"{arr.size // 3} pixels given for a {width}x{height} image")
        return cls(arr.reshape(height, width, 3))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, RgbImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True, eq=False)
class SegmentMap:
    """Dense per-pixel segment ids, shape ``(height, width)``."""

    ids: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.ids)
        if ids.ndim != 2 or ids.size == 0:
            raise DimensionMismatch(f"expected a non-empty 2-D id grid, got shape {ids.shape}")
        if not np.issubdtype(ids.dtype, np.integer):
            raise ValueError("segment ids must be integers")
        ids = ids.astype(np.int32, copy=False)
        if ids.min() < 0:
            raise ValueError("segment ids must be non-negative")
        counts = np.bincount(ids.ravel())
        if np.any(counts == 0):
            raise ValueError("segment ids are not dense")
        object.__setattr__(self, "ids", _frozen(ids))

    @property
    def width(self) -> int:
        return self.ids.shape[1]

    @property
    def height(self) -> int:
        return self.ids.shape[0]

    @property
    def n_segments(self) -> int:
        return int(self.ids.max()) + 1

    def __eq__(self, other):
        if not isinstance(other, SegmentMap):
            return NotImplemented
        return np.array_equal(self.ids, other.ids)


@dataclass(frozen=True, eq=False)
class Region:
    """Pixels carrying one segment id. ``xs``/``ys`` are parallel, in raster order."""

    id: int
    xs: np.ndarray
    ys: np.ndarray
    bbox: tuple[int, int, int, int]  # (min_x, min_y, max_x, max_y)

    @property
    def size(self) -> int:
        return len(self.xs)

    @property
    def pixel_coords(self) -> set[tuple[int, int]]:
        return set(zip(self.xs.tolist(), self.ys.tolist()))

    def pixels_of(self, img: RgbImage) -> np.ndarray:
        """``(n, 3)`` uint8 colors of this region's pixels in ``img``."""
        return img.pixels[self.ys, self.xs]


def relabel_first_touch(labels: np.ndarray) -> np.ndarray:
    """Map arbitrary integer labels to 0..n-1 in raster-scan first-occurrence order."""
    flat = np.asarray(labels).ravel()
    uniq, first, inverse = np.unique(flat, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty(len(uniq), dtype=np.int32)
    rank[order] = np.arange(len(uniq), dtype=np.int32)
    return rank[inverse.ravel()].reshape(np.shape(labels))


def extract_regions(segmap: SegmentMap) -> list[Region]:
    """One Region per segment id, ordered by id. Connectivity is irrelevant."""
    flat = segmap.ids.ravel()
    order = np.argsort(flat, kind="stable")
    counts = np.bincount(flat, minlength=segmap.n_segments)
    bounds = np.concatenate(([0], np.cumsum(counts)))
    w = segmap.width
    regions = []
    for seg_id in range(segmap.n_segments):
        idx = order[bounds[seg_id]:bounds[seg_id + 1]]
        ys, xs = np.divmod(idx, w)
        bbox = (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
        regions.append(Region(seg_id, _frozen(xs), _frozen(ys), bbox))
    return regions


_FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


def connected_components(labels) -> SegmentMap:
    """4-connected components of equal label, ids in raster first-touch order.

    VOID pixels form their own components like any other label; callers decide
    whether to keep them.
    """
    grid = np.asarray(labels)
    if grid.ndim != 2 or grid.size == 0:
        raise DimensionMismatch(f"expected a non-empty 2-D label grid, got shape {grid.shape}")
    combined = np.zeros(grid.shape, dtype=np.int64)
    offset = 0
    for value in np.unique(grid):
        comp, n = ndimage.label(grid == value, structure=_FOUR_CONNECTED)
        mask = comp > 0
        combined[mask] = comp[mask] + offset
        offset += n
    return SegmentMap(relabel_first_touch(combined))
