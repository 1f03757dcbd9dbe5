"""Visual vocabulary: seeded k-means++ / Lloyd clustering of descriptors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData

MAX_TRAINING_DESCRIPTORS = 500_000
_CHUNK = 16_384


@dataclass(frozen=True, eq=False)
class Vocabulary:
    words: np.ndarray  # (k, dim)

    def __post_init__(self):
        words = np.array(self.words, dtype=np.float64)
        if words.ndim != 2 or words.shape[0] < 1:
            raise ValueError("vocabulary needs at least one word")
        if not np.all(np.isfinite(words)):
            raise ValueError("vocabulary words must be finite")
        words.flags.writeable = False
        object.__setattr__(self, "words", words)

    @property
    def k(self) -> int:
        return self.words.shape[0]

    @property
    def dim(self) -> int:
        return self.words.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return np.array_equal(self.words, other.words)


def _sq_dists(x: np.ndarray, centers: np.ndarray, x_sq: np.ndarray) -> np.ndarray:
    d = x_sq[:, None] - 2.0 * x @ centers.T + (centers ** 2).sum(axis=1)[None, :]
    return np.maximum(d, 0.0)


def _assign(x, centers, x_sq):
    labels = np.empty(len(x), dtype=np.int64)
    mins = np.empty(len(x))
    for start in range(0, len(x), _CHUNK):
        d = _sq_dists(x[start:start + _CHUNK], centers, x_sq[start:start + _CHUNK])
        labels[start:start + _CHUNK] = d.argmin(axis=1)
        mins[start:start + _CHUNK] = d[np.arange(len(d)), labels[start:start + _CHUNK]]
    return labels, mins


def kmeans_plusplus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    x_sq = (x ** 2).sum(axis=1)
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(len(x))]
    closest = _sq_dists(x, centers[:1], x_sq)[:, 0]
    for i in range(1, k):
        total = closest.sum()
        if total <= 0:
            raise InsufficientData(f"only {i} distinct descriptors available for k={k}")
        pick = rng.choice(len(x), p=closest / total)
        centers[i] = x[pick]
        closest = np.minimum(closest, _sq_dists(x, centers[i:i + 1], x_sq)[:, 0])
    return centers


def lloyd(x: np.ndarray, init: np.ndarray, max_iters: int = 100, tol: float = 1e-4):
    """Lloyd iterations from ``init``; returns ``(centers, labels, inertia_history)``.

    Stops once no center moves more than ``tol`` or after ``max_iters``
    updates. A cluster that loses all members is reseeded at the point
    farthest from its current center.
    """
    x = np.asarray(x, dtype=np.float64)
    centers = np.array(init, dtype=np.float64)
    k = len(centers)
    x_sq = (x ** 2).sum(axis=1)
    labels, mins = _assign(x, centers, x_sq)
    history = [float(mins.sum())]
    for _ in range(max_iters):
        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, x)
        new = centers.copy()
        filled = counts > 0
        new[filled] = sums[filled] / counts[filled, None]
        if not filled.all():
            farthest = iter(np.argsort(-mins, kind="stable"))
            for empty in np.flatnonzero(~filled):
                new[empty] = x[next(farthest)]
        shift = np.sqrt(((new - centers) ** 2).sum(axis=1)).max()
        centers = new
        labels, mins = _assign(x, centers, x_sq)
        history.append(float(mins.sum()))
        assert history[-1] <= history[-2] * (1 + 1e-9) + 1e-12, "k-means inertia increased"
        if shift < tol:
            break
    return centers, labels, history


def train_vocabulary(descriptors, k: int = 60, seed: int = 0, max_iters: int = 100,
                     tol: float = 1e-4) -> Vocabulary:
    """Cluster descriptors into ``k`` visual words with k-means++ seeding.

    More than ``MAX_TRAINING_DESCRIPTORS`` inputs are first thinned to a
    seeded uniform subsample. Identical inputs and seed give identical words.
    """
    x = np.asarray(descriptors, dtype=np.float64)
    if k < 1:
        raise ValueError("k must be >= 1")
    if x.ndim != 2 or len(x) < k:
        raise InsufficientData(f"{len(x)} descriptors cannot form {k} clusters")
    rng = np.random.default_rng(seed)
    if len(x) > MAX_TRAINING_DESCRIPTORS:
        x = x[np.sort(rng.choice(len(x), MAX_TRAINING_DESCRIPTORS, replace=False))]
    centers, _, _ = lloyd(x, kmeans_plusplus(x, k, rng), max_iters, tol)
    return Vocabulary(centers)
