"""SIFT keypoints and 128-D gradient-orientation descriptors.

Follows Lowe (2004): a doubled-resolution Gaussian pyramid, difference-of-
Gaussian extrema refined to sub-pixel accuracy, low-contrast and edge-like
responses rejected, one keypoint per dominant gradient orientation, and a
4x4x8 orientation histogram descriptor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

from .core import RgbImage, SegmentMap
from .errors import OutOfBounds
from .filters import blur

MIN_IMAGE_SIZE = 16
DESCRIPTOR_CLAMP = 0.2
_BORDER = 5
_MAX_REFINE_STEPS = 5
_ORI_BINS = 36
_ORI_PEAK_RATIO = 0.8
_DESC_WIDTH = 4
_DESC_BINS = 8


@dataclass(frozen=True)
class Keypoint:
    x: float
    y: float
    scale: float        # detection sigma, input-image pixels
    orientation: float  # radians in [0, 2*pi)


@dataclass(frozen=True)
class SiftParams:
    n_octaves: int = 4
    scales_per_octave: int = 3
    sigma: float = 1.6
    contrast_threshold: float = 0.03
    edge_ratio: float = 10.0
    upsample: bool = True
    assumed_blur: float = 0.5


Feature = tuple[Keypoint, np.ndarray]
Detector = Callable[[RgbImage], list[Feature]]


def to_gray(img: RgbImage) -> np.ndarray:
    px = img.pixels.astype(np.float64)
    return (0.299 * px[..., 0] + 0.587 * px[..., 1] + 0.114 * px[..., 2]) / 255.0


def _upsample2(gray: np.ndarray) -> np.ndarray:
    # base[2i] == gray[i]; odd samples are midpoints, so base coords = 2 * input coords
    def along(a, axis):
        nxt = np.concatenate([np.take(a, np.arange(1, a.shape[axis]), axis=axis),
                              np.take(a, [-1], axis=axis)], axis=axis)
        out = np.stack([a, 0.5 * (a + nxt)], axis=axis + 1)
        shape = list(a.shape)
        shape[axis] *= 2
        return out.reshape(shape)
    return along(along(gray, 0), 1)


def build_pyramid(gray: np.ndarray, params: SiftParams) -> tuple[list[list[np.ndarray]], list[np.ndarray]]:
    """Gaussian and DoG stacks per octave (``s + 3`` and ``s + 2`` layers)."""
    s = params.scales_per_octave
    if params.upsample:
        base = _upsample2(gray)
        have = 2.0 * params.assumed_blur
    else:
        base = gray
        have = params.assumed_blur
    base = blur(base, math.sqrt(max(params.sigma ** 2 - have ** 2, 0.01)))

    k = 2.0 ** (1.0 / s)
    incr = [0.0]
    for i in range(1, s + 3):
        prev = params.sigma * k ** (i - 1)
        incr.append(math.sqrt((prev * k) ** 2 - prev ** 2))

    gaussians, dogs = [], []
    for _ in range(params.n_octaves):
        if min(base.shape) < 2 * _BORDER + 3:
            break
        layers = [base]
        for sig in incr[1:]:
            layers.append(blur(layers[-1], sig))
        gaussians.append(layers)
        dogs.append(np.stack([b - a for a, b in zip(layers, layers[1:])]))
        base = layers[s][::2, ::2]
    return gaussians, dogs


def _gradient_field(layer: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dx = np.zeros_like(layer)
    dy = np.zeros_like(layer)
    dx[:, 1:-1] = layer[:, 2:] - layer[:, :-2]
    dy[1:-1, :] = layer[2:, :] - layer[:-2, :]
    return np.hypot(dx, dy), np.mod(np.arctan2(dy, dx), 2 * np.pi)


def _scan_extrema(dog: np.ndarray, threshold: float) -> np.ndarray:
    """(layer, y, x) of 26-neighbourhood extrema in the interior layers."""
    mx = ndimage.maximum_filter(dog, size=3, mode="nearest")
    mn = ndimage.minimum_filter(dog, size=3, mode="nearest")
    cand = ((dog == mx) & (dog > threshold)) | ((dog == mn) & (dog < -threshold))
    cand[0] = cand[-1] = False
    cand[:, :_BORDER] = cand[:, -_BORDER:] = False
    cand[:, :, :_BORDER] = cand[:, :, -_BORDER:] = False
    return np.argwhere(cand)


def _refine(dog: np.ndarray, s: int, y: int, x: int, params: SiftParams):
    """Quadratic sub-pixel fit; returns (s, y, x, offset) or None when rejected."""
    n_layers, h, w = dog.shape
    for _ in range(_MAX_REFINE_STEPS):
        c = dog[s, y, x]
        grad = 0.5 * np.array([dog[s, y, x + 1] - dog[s, y, x - 1],
                               dog[s, y + 1, x] - dog[s, y - 1, x],
                               dog[s + 1, y, x] - dog[s - 1, y, x]])
        dxx = dog[s, y, x + 1] + dog[s, y, x - 1] - 2 * c
        dyy = dog[s, y + 1, x] + dog[s, y - 1, x] - 2 * c
        dss = dog[s + 1, y, x] + dog[s - 1, y, x] - 2 * c
        dxy = 0.25 * (dog[s, y + 1, x + 1] - dog[s, y + 1, x - 1] - dog[s, y - 1, x + 1] + dog[s, y - 1, x - 1])
        dxs = 0.25 * (dog[s + 1, y, x + 1] - dog[s + 1, y, x - 1] - dog[s - 1, y, x + 1] + dog[s - 1, y, x - 1])
        dys = 0.25 * (dog[s + 1, y + 1, x] - dog[s + 1, y - 1, x] - dog[s - 1, y + 1, x] + dog[s - 1, y - 1, x])
        hess = np.array([[dxx, dxy, dxs], [dxy, dyy, dys], [dxs, dys, dss]])
        try:
            offset = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            return None
        if np.all(np.abs(offset) < 0.5):
            break
        x += int(round(offset[0]))
        y += int(round(offset[1]))
        s += int(round(offset[2]))
        if not (1 <= s < n_layers - 1 and _BORDER <= y < h - _BORDER and _BORDER <= x < w - _BORDER):
            return None
    else:
        return None

    contrast = c + 0.5 * grad @ offset
    if abs(contrast) < params.contrast_threshold:
        return None
    tr = dxx + dyy
    det = dxx * dyy - dxy * dxy
    r = params.edge_ratio
    if det <= 0 or tr * tr * r >= (r + 1) ** 2 * det:
        return None
    return s, y, x, offset


def _orientations(mag, ori, x, y, scale_oct) -> list[float]:
    h, w = mag.shape
    sig_w = 1.5 * scale_oct
    radius = int(round(3 * sig_w))
    y0, y1 = max(1, y - radius), min(h - 2, y + radius)
    x0, x1 = max(1, x - radius), min(w - 2, x + radius)
    if y1 < y0 or x1 < x0:
        return []
    yy, xx = np.mgrid[y0:y1 + 1, x0:x1 + 1]
    weight = np.exp(-((xx - x) ** 2 + (yy - y) ** 2) / (2 * sig_w ** 2))
    bins = np.floor(ori[y0:y1 + 1, x0:x1 + 1] * _ORI_BINS / (2 * np.pi)).astype(int) % _ORI_BINS
    hist = np.bincount(bins.ravel(), (weight * mag[y0:y1 + 1, x0:x1 + 1]).ravel(), minlength=_ORI_BINS)
    hist = (6 * hist + 4 * (np.roll(hist, 1) + np.roll(hist, -1))
            + np.roll(hist, 2) + np.roll(hist, -2)) / 16.0
    peak = hist.max()
    if peak <= 0:
        return []
    left, right = np.roll(hist, 1), np.roll(hist, -1)
    out = []
    for i in np.flatnonzero((hist > left) & (hist > right) & (hist >= _ORI_PEAK_RATIO * peak)):
        denom = left[i] - 2 * hist[i] + right[i]
        shift = 0.5 * (left[i] - right[i]) / denom if denom != 0 else 0.0
        angle = (i + 0.5 + shift) * 2 * np.pi / _ORI_BINS
        out.append(float(np.mod(angle, 2 * np.pi)))
    return out


def normalize_descriptor(raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(clamped, final)``: unit-normalized and clipped at 0.2, then renormalized."""
    raw = np.asarray(raw, dtype=np.float64)
    peak = raw.max(initial=0.0)
    if peak <= 0:
        return np.zeros_like(raw), np.zeros_like(raw)
    raw = raw / peak  # guards the norm against under/overflow
    clamped = np.minimum(raw / np.linalg.norm(raw), DESCRIPTOR_CLAMP)
    norm = np.linalg.norm(clamped)
    return clamped, clamped / norm


def _raw_descriptor(mag, ori, x, y, scale_oct, angle) -> np.ndarray:
    d, n = _DESC_WIDTH, _DESC_BINS
    h, w = mag.shape
    hist_width = 3.0 * scale_oct
    radius = int(round(hist_width * math.sqrt(2) * (d + 1) * 0.5))
    radius = min(radius, int(math.hypot(h, w)))
    cos_t, sin_t = math.cos(angle), math.sin(angle)

    y0, y1 = max(1, y - radius), min(h - 2, y + radius)
    x0, x1 = max(1, x - radius), min(w - 2, x + radius)
    yy, xx = np.mgrid[y0:y1 + 1, x0:x1 + 1]
    dx, dy = (xx - x).ravel(), (yy - y).ravel()
    # sample offsets in the keypoint frame, in units of histogram cells
    col = (cos_t * dx + sin_t * dy) / hist_width
    row = (-sin_t * dx + cos_t * dy) / hist_width
    rbin = row + d / 2 - 0.5
    cbin = col + d / 2 - 0.5
    keep = (rbin > -1) & (rbin < d) & (cbin > -1) & (cbin < d)
    rbin, cbin, row, col = rbin[keep], cbin[keep], row[keep], col[keep]
    m = mag[y0:y1 + 1, x0:x1 + 1].ravel()[keep]
    rel = np.mod(ori[y0:y1 + 1, x0:x1 + 1].ravel()[keep] - angle, 2 * np.pi)
    obin = rel * n / (2 * np.pi)
    weight = m * np.exp(-(row ** 2 + col ** 2) / (2 * (0.5 * d) ** 2))

    r0, c0, o0 = np.floor(rbin).astype(int), np.floor(cbin).astype(int), np.floor(obin).astype(int)
    fr, fc, fo = rbin - r0, cbin - c0, obin - o0
    hist = np.zeros((d + 2, d + 2, n))
    for dr, wr in ((0, 1 - fr), (1, fr)):
        for dc, wc in ((0, 1 - fc), (1, fc)):
            for do, wo in ((0, 1 - fo), (1, fo)):
                np.add.at(hist, (r0 + dr + 1, c0 + dc + 1, (o0 + do) % n), weight * wr * wc * wo)
    return hist[1:-1, 1:-1].ravel()


def sift_features(img: RgbImage, params: SiftParams = SiftParams()) -> list[Feature]:
    if img.width < MIN_IMAGE_SIZE or img.height < MIN_IMAGE_SIZE:
        return []
    gaussians, dogs = build_pyramid(to_gray(img), params)
    s_per = params.scales_per_octave
    to_input = 0.5 if params.upsample else 1.0
    prefilter = 0.5 * params.contrast_threshold / s_per
    found = []
    for octave, (layers, dog) in enumerate(zip(gaussians, dogs)):
        grads = {}
        seen = set()
        for s, y, x in _scan_extrema(dog, prefilter):
            fit = _refine(dog, int(s), int(y), int(x), params)
            if fit is None:
                continue
            s_i, y_i, x_i, offset = fit
            if (s_i, y_i, x_i) in seen:
                continue
            seen.add((s_i, y_i, x_i))
            scale_oct = params.sigma * 2.0 ** ((s_i + offset[2]) / s_per)
            if s_i not in grads:
                grads[s_i] = _gradient_field(layers[s_i])
            mag, ori = grads[s_i]
            factor = 2.0 ** octave * to_input
            kx = (x_i + offset[0]) * factor
            ky = (y_i + offset[1]) * factor
            if not (0 <= kx <= img.width - 1 and 0 <= ky <= img.height - 1):
                continue
            for angle in _orientations(mag, ori, x_i, y_i, scale_oct):
                raw = _raw_descriptor(mag, ori, x_i, y_i, scale_oct, angle)
                _, desc = normalize_descriptor(raw)
                found.append((Keypoint(float(kx), float(ky), float(scale_oct * factor), angle), desc))
    found.sort(key=lambda f: (f[0].y, f[0].x, f[0].scale, f[0].orientation))
    return found


def detect_and_describe(img: RgbImage, detector: Detector | None = None) -> list[Feature]:
    """Keypoints with their descriptors; any callable with this signature can replace SIFT."""
    return (detector or sift_features)(img)


def assign_keypoints(features: Sequence[Feature], segmap: SegmentMap) -> dict[int, list[np.ndarray]]:
    """Bucket descriptors by the segment under each keypoint's rounded position."""
    out = {i: [] for i in range(segmap.n_segments)}
    for kp, desc in features:
        xi, yi = math.floor(kp.x + 0.5), math.floor(kp.y + 0.5)
        if not (0 <= xi < segmap.width and 0 <= yi < segmap.height):
            raise OutOfBounds(f"keypoint at ({kp.x:.2f}, {kp.y:.2f}) outside {segmap.width}x{segmap.height} map")
        out[int(segmap.ids[yi, xi])].append(desc)
    return out


def write_keypoints(features: Sequence[Feature], path) -> None:
    """One line per keypoint: ``x y scale orientation d0 ... d127``."""
    with open(path, "w") as fh:
        for kp, desc in features:
            vals = [kp.x, kp.y, kp.scale, kp.orientation, *np.asarray(desc).tolist()]
            fh.write(" ".join(repr(float(v)) for v in vals) + "\n")
