import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import ndimage

from scene_labeller.core import RgbImage, SegmentMap
from scene_labeller.errors import OutOfBounds
from scene_labeller.keypoints import (DESCRIPTOR_CLAMP, Keypoint, SiftParams, _raw_descriptor, assign_keypoints,
                                      build_pyramid, detect_and_describe, normalize_descriptor, sift_features,
                                      to_gray, write_keypoints)


def _gray_image(a):
    a = np.clip(np.rint(a), 0, 255).astype(np.uint8)
    return RgbImage(np.repeat(a[..., None], 3, axis=2))


def _texture_scene(seed=3, ox=0, oy=0, size=128):
    rng = np.random.default_rng(seed)
    tex = ndimage.gaussian_filter(rng.random((48, 48)), 1.5)
    tex = (tex - tex.min()) / (tex.max() - tex.min()) * 200 + 20
    a = np.full((size, size), 120.0)
    a[40 + oy:88 + oy, 40 + ox:88 + ox] = tex
    return _gray_image(a)


@pytest.fixture(scope="module")
def textured_features():
    return sift_features(_texture_scene())


def test_constant_image_has_no_keypoints():
    assert detect_and_describe(RgbImage(np.full((64, 64, 3), 128))) == []


def test_tiny_image_returns_empty():
    rng = np.random.default_rng(0)
    assert detect_and_describe(RgbImage(rng.integers(0, 256, (15, 40, 3)))) == []


def test_luma_conversion():
    img = RgbImage(np.array([[[255, 0, 0], [0, 255, 0], [0, 0, 255]]]))
    np.testing.assert_allclose(to_gray(img)[0], [0.299, 0.587, 0.114])


def test_descriptors_are_unit_norm_and_well_formed(textured_features):
    assert len(textured_features) > 10
    for kp, desc in textured_features:
        assert desc.shape == (128,)
        assert np.all(np.isfinite(desc)) and np.all(desc >= 0)
        assert abs(np.linalg.norm(desc) - 1.0) <= 1e-4
        assert 0 <= kp.orientation < 2 * np.pi
        assert kp.scale > 0


def test_descriptor_clamp_recheck(textured_features):
    # recompute raw histograms for a few keypoints and verify the pre-renormalization clamp
    gray = to_gray(_texture_scene())
    gaussians, _ = build_pyramid(gray, SiftParams())
    layer = gaussians[0][1]
    dx = np.zeros_like(layer)
    dy = np.zeros_like(layer)
    dx[:, 1:-1] = layer[:, 2:] - layer[:, :-2]
    dy[1:-1, :] = layer[2:, :] - layer[:-2, :]
    mag, ori = np.hypot(dx, dy), np.mod(np.arctan2(dy, dx), 2 * np.pi)
    for x, y, angle in [(100, 100, 0.3), (120, 90, 2.0), (130, 140, 5.5)]:
        clamped, final = normalize_descriptor(_raw_descriptor(mag, ori, x, y, 1.6, angle))
        assert clamped.max() <= DESCRIPTOR_CLAMP + 1e-4
        assert abs(np.linalg.norm(final) - 1) <= 1e-4
        np.testing.assert_allclose(final * np.linalg.norm(clamped), clamped)


@given(arrays(np.float64, 128, elements=st.floats(0, 1e3)))
@settings(max_examples=100, deadline=None)
def test_normalize_descriptor_properties(raw):
    clamped, final = normalize_descriptor(raw)
    if not raw.any():
        assert not final.any()
        return
    assert clamped.max() <= DESCRIPTOR_CLAMP + 1e-12
    assert abs(np.linalg.norm(final) - 1) <= 1e-9
    assert np.all(final >= 0)


def _dog_peak(img_float, s):
    """Exhaustive scan of |DoG| at the blob's characteristic scale."""
    k = 2 ** (1 / 3)
    dog = ndimage.gaussian_filter(img_float, s * k) - ndimage.gaussian_filter(img_float, s)
    y, x = np.unravel_index(np.argmax(np.abs(dog)), dog.shape)
    return x, y


@pytest.mark.parametrize("s,cx,cy", [(2.0, 30.0, 34.0), (3.0, 40.5, 31.25), (5.0, 48.0, 50.0)])
def test_blob_centre_is_detected(s, cx, cy):
    yy, xx = np.mgrid[0:96, 0:96].astype(float)
    blob = 40 + 180 * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * s * s))
    px, py = _dog_peak(blob, s)
    assert np.hypot(px - cx, py - cy) <= 1.0
    feats = sift_features(_gray_image(blob))
    assert feats
    nearest = min(np.hypot(kp.x - cx, kp.y - cy) for kp, _ in feats)
    assert nearest <= 2.0


def test_deterministic_and_sorted(textured_features):
    again = sift_features(_texture_scene())
    assert [k for k, _ in again] == [k for k, _ in textured_features]
    assert all(np.array_equal(a, b) for (_, a), (_, b) in zip(again, textured_features))
    keys = [(k.y, k.x, k.scale, k.orientation) for k, _ in textured_features]
    assert keys == sorted(keys)


@pytest.mark.parametrize("ox,oy", [(8, 4), (7, 3), (-5, 2)])
def test_translation_shifts_keypoints(textured_features, ox, oy):
    shifted = sift_features(_texture_scene(ox=ox, oy=oy))
    pts = np.array([(k.x, k.y) for k, _ in shifted])
    interior = [k for k, _ in textured_features if 20 <= k.x <= 107 and 20 <= k.y <= 107]
    assert interior
    for k in interior:
        assert np.min(np.hypot(pts[:, 0] - (k.x + ox), pts[:, 1] - (k.y + oy))) <= 0.5


def test_pluggable_detector():
    fake = [(Keypoint(1.0, 1.0, 2.0, 0.0), np.ones(16) / 4)]
    assert detect_and_describe(RgbImage(np.zeros((4, 4, 3))), detector=lambda img: fake) is fake


def _feat(x, y):
    return Keypoint(x, y, 1.6, 0.0), np.full(128, x + 10 * y)


def test_assign_empty_keypoints():
    segmap = SegmentMap(np.array([[0, 1], [2, 2]]))
    assert assign_keypoints([], segmap) == {0: [], 1: [], 2: []}


def test_assign_single_segment():
    feats = [_feat(0.2, 0.4), _feat(2.7, 1.1)]
    out = assign_keypoints(feats, SegmentMap(np.zeros((3, 4), dtype=int)))
    assert len(out[0]) == 2


def test_assign_matches_direct_lookup(rng):
    ids = rng.integers(0, 5, (20, 30))
    ids[0, :5] = np.arange(5)
    segmap = SegmentMap(ids)
    feats = [_feat(float(x), float(y)) for x, y in zip(rng.uniform(0, 29.49, 200), rng.uniform(0, 19.49, 200))]
    out = assign_keypoints(feats, segmap)
    expected = {i: [] for i in range(5)}
    for kp, desc in feats:
        expected[int(ids[int(np.floor(kp.y + 0.5)), int(np.floor(kp.x + 0.5))])].append(desc)
    assert sum(len(v) for v in out.values()) == 200
    for i in range(5):
        assert len(out[i]) == len(expected[i])
        assert all(np.array_equal(a, b) for a, b in zip(out[i], expected[i]))


def test_assign_out_of_bounds():
    with pytest.raises(OutOfBounds):
        assign_keypoints([_feat(5.0, 0.0)], SegmentMap(np.zeros((2, 2), dtype=int)))


def test_write_keypoints_format(tmp_path, textured_features):
    path = tmp_path / "kp.txt"
    write_keypoints(textured_features[:3], path)
    lines = path.read_text().splitlines()
    assert len(lines) == 3
    vals = [float(v) for v in lines[0].split()]
    kp, desc = textured_features[0]
    assert len(vals) == 4 + 128
    assert vals[:4] == [kp.x, kp.y, kp.scale, kp.orientation]
    assert vals[4:] == desc.tolist()
