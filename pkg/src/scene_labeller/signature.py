"""Region signatures: fuzzy bag-of-visual-words weights plus RGB mean/variance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyRegion
from .vocabulary import Vocabulary

COLOR_DIM = 6
COINCIDENT_DISTANCE = 1e-12


@dataclass(frozen=True)
class SignatureConfig:
    vocab_size: int = 60
    fuzziness: float = 2.0
    normalize_bow: bool = True
    use_color: bool = True

    def __post_init__(self):
        if not self.fuzziness > 1:
            raise ValueError("fuzziness must be > 1")
        if self.vocab_size < 1:
            raise ValueError("vocab_size must be >= 1")

    @property
    def dim(self) -> int:
        return self.vocab_size + (COLOR_DIM if self.use_color else 0)


@dataclass(frozen=True, eq=False)
class Signature:
    bow: np.ndarray    # (k,) visual-word weights
    color: np.ndarray  # (6,) mean r,g,b then population variance r,g,b on [0, 1]

    @property
    def dim(self) -> int:
        return len(self.bow) + len(self.color)

    def features(self, use_color: bool = True) -> np.ndarray:
        return np.concatenate([self.bow, self.color]) if use_color else self.bow.copy()


def fuzzy_memberships(descriptors, vocab: Vocabulary, m: float = 2.0) -> np.ndarray:
    """Fuzzy c-means membership of each descriptor in each visual word.

    ``U[j, i] = 1 / sum_n (d(p_j, v_i) / d(p_j, v_n)) ** (2 / (m - 1))``.
    Accepts one descriptor ``(dim,)`` or a batch ``(n, dim)``. A descriptor
    sitting on one or more words shares its membership equally among them.
    """
    if not m > 1:
        raise ValueError("fuzziness must be > 1")
    p = np.asarray(descriptors, dtype=np.float64)
    single = p.ndim == 1
    p = np.atleast_2d(p)
    if p.shape[1] != vocab.dim:
        raise DimensionMismatch(f"descriptor dim {p.shape[1]} != vocabulary dim {vocab.dim}")
    dist = np.empty((len(p), vocab.k))
    for start in range(0, len(p), 256):
        diff = p[start:start + 256, None, :] - vocab.words[None, :, :]
        dist[start:start + 256] = np.sqrt((diff ** 2).sum(axis=2))
    coincident = dist < COINCIDENT_DISTANCE
    hit = coincident.any(axis=1)

    # equivalent to the ratio form: U_i proportional to d_i ** (-2 / (m - 1))
    with np.errstate(divide="ignore"):
        logw = -(2.0 / (m - 1.0)) * np.log(dist)
    logw[hit] = 0.0
    logw -= logw.max(axis=1, keepdims=True)
    w = np.exp(logw)
    u = w / w.sum(axis=1, keepdims=True)
    if hit.any():
        share = coincident[hit].astype(np.float64)
        u[hit] = share / share.sum(axis=1, keepdims=True)
    return u[0] if single else u


def color_statistics(pixels) -> np.ndarray:
    px = np.asarray(pixels, dtype=np.float64).reshape(-1, 3) / 255.0
    return np.concatenate([px.mean(axis=0), px.var(axis=0)])


def bow_weights(descriptors, vocab: Vocabulary, cfg: SignatureConfig = SignatureConfig()) -> np.ndarray:
    """Summed memberships of a region's descriptors, averaged when ``normalize_bow``; zeros if none."""
    desc = np.asarray(descriptors, dtype=np.float64).reshape(-1, vocab.dim)
    if not len(desc):
        return np.zeros(vocab.k)
    bow = fuzzy_memberships(desc, vocab, cfg.fuzziness).sum(axis=0)
    return bow / len(desc) if cfg.normalize_bow else bow


def region_signature(region_pixels, descriptors, vocab: Vocabulary,
                     cfg: SignatureConfig = SignatureConfig()) -> Signature:
    """Signature of one region from its ``(n, 3)`` pixel colors and its descriptors."""
    pixels = np.asarray(region_pixels)
    if pixels.size == 0:
        raise EmptyRegion("region has no pixels")
    if vocab.k != cfg.vocab_size:
        raise DimensionMismatch(f"vocabulary has {vocab.k} words, config expects {cfg.vocab_size}")
    return Signature(bow_weights(descriptors, vocab, cfg), color_statistics(pixels))
