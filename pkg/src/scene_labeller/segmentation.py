"""Graph-based color segmentation (Felzenszwalb & Huttenlocher, 2004).

Pixels are graph nodes joined to their 8 neighbours by edges weighted with the
RGB distance between smoothed colors. Edges are visited in ascending weight
order and two components merge when the joining edge is no heavier than both
internal differences relaxed by ``k / |C|``. A second pass absorbs components
smaller than ``min_size`` into their cheapest neighbour.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numba
import numpy as np

from .core import RgbImage, SegmentMap, relabel_first_touch
from .filters import blur


@dataclass(frozen=True)
class SegParams:
    # defaults chosen for slight over-segmentation of 320x240 outdoor scenes
    sigma: float = 0.8
    k_threshold: float = 300.0
    min_size: int = 100

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not self.k_threshold > 0:
            raise ValueError("k_threshold must be > 0")
        if self.min_size < 1:
            raise ValueError("min_size must be >= 1")


class WeightedEdge(NamedTuple):
    a: int
    b: int
    w: float


class GridEdges(NamedTuple):
    """Struct-of-arrays edge list in construction order."""

    a: np.ndarray
    b: np.ndarray
    w: np.ndarray

    def __len__(self):
        return len(self.w)

    def edges(self):
        for a, b, w in zip(self.a.tolist(), self.b.tolist(), self.w.tolist()):
            yield WeightedEdge(a, b, w)


@dataclass
class ComponentForest:
    parent: np.ndarray
    rank: np.ndarray
    size: np.ndarray
    int_diff: np.ndarray

    @classmethod
    def singletons(cls, n: int) -> "ComponentForest":
        return cls(np.arange(n, dtype=np.int64), np.zeros(n, dtype=np.int64),
                   np.ones(n, dtype=np.int64), np.zeros(n, dtype=np.float64))

    def roots(self) -> np.ndarray:
        """Root of every element (compresses paths as a side effect)."""
        return _all_roots(self.parent)


def gaussian_smooth(img: RgbImage, sigma: float) -> RgbImage:
    """Per-channel Gaussian blur, rounded back to 8 bits. ``sigma == 0`` is the identity."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return img
    out = blur(img.pixels.astype(np.float64), sigma)
    return RgbImage(np.clip(np.rint(out), 0, 255).astype(np.uint8))


# neighbour offsets (dy, dx) in per-pixel construction order
_NEIGHBOURS = ((0, 1), (1, 0), (1, 1), (1, -1))


def build_grid_graph(img: RgbImage) -> GridEdges:
    """8-connected grid graph; edges ordered by source pixel, then right/down/down-right/down-left."""
    h, w = img.height, img.width
    px = img.pixels.astype(np.int64)
    idx = np.arange(h * w, dtype=np.int64).reshape(h, w)
    a = np.full((h, w, 4), -1, dtype=np.int64)
    b = np.full((h, w, 4), -1, dtype=np.int64)
    d2 = np.zeros((h, w, 4), dtype=np.int64)
    for n, (dy, dx) in enumerate(_NEIGHBOURS):
        y0, y1 = 0, h - dy
        x0, x1 = max(0, -dx), w - max(0, dx)
        if y1 <= y0 or x1 <= x0:
            continue
        src = (slice(y0, y1), slice(x0, x1))
        dst = (slice(y0 + dy, y1 + dy), slice(x0 + dx, x1 + dx))
        a[src + (n,)] = idx[src]
        b[src + (n,)] = idx[dst]
        d2[src + (n,)] = ((px[src] - px[dst]) ** 2).sum(axis=-1)
    valid = a.ravel() >= 0
    return GridEdges(a.ravel()[valid], b.ravel()[valid], np.sqrt(d2.ravel()[valid].astype(np.float64)))


@numba.njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@numba.njit(cache=True)
def _union(parent, rank, size, int_diff, ra, rb, w):
    if rank[ra] < rank[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]
    if rank[ra] == rank[rb]:
        rank[ra] += 1
    int_diff[ra] = max(int_diff[ra], int_diff[rb], w)


@numba.njit(cache=True)
def _merge_pass(ea, eb, ew, order, k, min_size, parent, rank, size, int_diff):
    for i in order:
        ra = _find(parent, ea[i])
        rb = _find(parent, eb[i])
        if ra == rb:
            continue
        w = ew[i]
        if w <= min(int_diff[ra] + k / size[ra], int_diff[rb] + k / size[rb]):
            _union(parent, rank, size, int_diff, ra, rb, w)
    if min_size > 1:
        for i in order:
            ra = _find(parent, ea[i])
            rb = _find(parent, eb[i])
            if ra != rb and (size[ra] < min_size or size[rb] < min_size):
                _union(parent, rank, size, int_diff, ra, rb, ew[i])


@numba.njit(cache=True)
def _all_roots(parent):
    out = np.empty_like(parent)
    for i in range(len(parent)):
        out[i] = _find(parent, i)
    return out


def segment_graph(n_nodes: int, edges: GridEdges, k_threshold: float, min_size: int) -> ComponentForest:
    """Run both merge passes over ``edges``; ties in weight keep construction order."""
    forest = ComponentForest.singletons(n_nodes)
    order = np.argsort(edges.w, kind="stable")
    _merge_pass(edges.a, edges.b, edges.w, order, float(k_threshold), int(min_size),
                forest.parent, forest.rank, forest.size, forest.int_diff)
    return forest


def segment_image(img: RgbImage, params: SegParams = SegParams()) -> SegmentMap:
    smoothed = gaussian_smooth(img, params.sigma)
    edges = build_grid_graph(smoothed)
    forest = segment_graph(img.width * img.height, edges, params.k_threshold, params.min_size)
    roots = forest.roots().reshape(img.height, img.width)
    return SegmentMap(relabel_first_touch(roots))
