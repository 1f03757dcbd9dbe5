import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_image
from reference_segmentation import reference_segment
from scene_labeller.core import RgbImage, relabel_first_touch
from scene_labeller.segmentation import (SegParams, build_grid_graph, gaussian_smooth, segment_graph,
                                         segment_image)


def test_params_validation():
    with pytest.raises(ValueError):
        SegParams(sigma=-1)
    with pytest.raises(ValueError):
        SegParams(k_threshold=0)
    with pytest.raises(ValueError):
        SegParams(min_size=0)


def test_smooth_zero_sigma_is_identity(rng):
    img = random_image(rng, 9, 7)
    assert np.array_equal(gaussian_smooth(img, 0).pixels, img.pixels)


@pytest.mark.parametrize("sigma", [0.5, 0.8, 2.0, 5.0])
def test_smooth_constant_image(sigma):
    img = RgbImage(np.full((10, 12, 3), [17, 200, 99]))
    assert np.array_equal(gaussian_smooth(img, sigma).pixels, img.pixels)


def test_smooth_impulse_matches_direct_gaussian():
    width, centre = 21, 10
    row = np.zeros((1, width, 3), dtype=np.uint8)
    row[0, centre] = 255
    out = gaussian_smooth(RgbImage(row), 1.0).pixels[0, :, 0].astype(float)

    taps = {k: math.exp(-k * k / 2.0) for k in range(-3, 4)}
    total = sum(taps.values())
    expected = [255.0 * taps.get(x - centre, 0.0) / total for x in range(width)]
    assert np.max(np.abs(out - expected)) <= 1.0


def test_grid_graph_2x2_has_six_edges():
    assert len(build_grid_graph(RgbImage(np.zeros((2, 2, 3))))) == 6


@given(st.integers(2, 30), st.integers(2, 30))
@settings(max_examples=40, deadline=None)
def test_grid_graph_edge_count(w, h):
    edges = build_grid_graph(RgbImage(np.zeros((h, w, 3))))
    assert len(edges) == 4 * w * h - 3 * w - 3 * h + 2


def test_grid_graph_constant_image_weights_zero():
    edges = build_grid_graph(RgbImage(np.full((5, 6, 3), 42)))
    assert np.all(edges.w == 0)


def test_grid_graph_hand_computed_3x3():
    red = np.array([[0, 3, 7], [1, 1, 5], [4, 0, 2]])
    img = np.zeros((3, 3, 3), dtype=np.uint8)
    img[..., 0] = red
    edges = build_grid_graph(RgbImage(img))
    # per pixel in raster order: right, down, down-right, down-left (when in bounds)
    expected = [3, 1, 1,  4, 2, 2, 2,  2, 6,  0, 3, 1,  4, 1, 1, 3,  3, 5,  4,  2]
    assert edges.w.tolist() == expected
    assert all(e.a != e.b and e.w >= 0 for e in edges.edges())
    assert list(edges.edges())[0] == (0, 1, 3.0)


def test_grid_graph_rgb_distance():
    img = RgbImage(np.array([[[0, 0, 0], [3, 4, 12]]]))
    assert build_grid_graph(img).w.tolist() == [13.0]


def test_constant_image_is_one_segment():
    img = RgbImage(np.full((20, 30, 3), 90))
    for params in (SegParams(), SegParams(sigma=0, k_threshold=1, min_size=1)):
        assert segment_image(img, params).n_segments == 1


def test_black_white_halves_give_two_segments():
    px = np.zeros((20, 20, 3), dtype=np.uint8)
    px[:, 10:] = 255
    segmap = segment_image(RgbImage(px), SegParams(sigma=0, k_threshold=50, min_size=1))
    assert segmap.n_segments == 2
    assert np.all(segmap.ids[:, :10] == 0) and np.all(segmap.ids[:, 10:] == 1)


def _reference(img, params):
    smoothed = gaussian_smooth(img, params.sigma).pixels.tolist()
    return np.array(reference_segment(smoothed, params.k_threshold, params.min_size))


@pytest.mark.parametrize("params", [
    SegParams(sigma=0, k_threshold=50, min_size=1),
    SegParams(sigma=0.8, k_threshold=300, min_size=10),
    SegParams(sigma=0.5, k_threshold=1000, min_size=30),
    SegParams(sigma=0, k_threshold=150, min_size=5),
])
def test_matches_reference_implementation(rng, params):
    for _ in range(10):
        levels = int(rng.choice([3, 8, 256]))
        img = RgbImage(rng.integers(0, levels, (16, 16, 3)) * (255 // max(levels - 1, 1)))
        np.testing.assert_array_equal(segment_image(img, params).ids, _reference(img, params))


def test_min_size_respected(rng):
    for min_size in (5, 20, 60):
        segmap = segment_image(random_image(rng, 24, 24), SegParams(0.5, 100, min_size))
        assert np.bincount(segmap.ids.ravel()).min() >= min_size


def test_min_size_larger_than_image():
    segmap = segment_image(random_image(np.random.default_rng(1), 5, 5), SegParams(0, 10, 1000))
    assert segmap.n_segments == 1


def test_deterministic(rng):
    img = random_image(rng, 40, 50)
    assert segment_image(img) == segment_image(img)


def _zero_weight_components(px):
    h, w = px.shape[:2]
    out = -np.ones((h, w), dtype=int)
    n = 0
    for sy in range(h):
        for sx in range(w):
            if out[sy, sx] >= 0:
                continue
            out[sy, sx] = n
            stack = [(sy, sx)]
            while stack:
                y, x = stack.pop()
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = y + dy, x + dx
                        if (0 <= ny < h and 0 <= nx < w and out[ny, nx] < 0
                                and np.array_equal(px[ny, nx], px[y, x])):
                            out[ny, nx] = n
                            stack.append((ny, nx))
            n += 1
    return out


def test_zero_threshold_merges_only_zero_weight_paths(rng):
    for _ in range(5):
        img = RgbImage(rng.integers(0, 2, (12, 12, 3)) * 255)
        forest = segment_graph(144, build_grid_graph(img), 0.0, 1)
        ids = relabel_first_touch(forest.roots().reshape(12, 12))
        np.testing.assert_array_equal(ids, _zero_weight_components(img.pixels))


def test_forest_invariants(rng):
    img = random_image(rng, 20, 20)
    forest = segment_graph(400, build_grid_graph(img), 300.0, 10)
    roots = np.unique(forest.roots())
    assert forest.size[roots].sum() == 400
    assert np.all(forest.int_diff >= 0)
