import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import cv2

from palettewarp.colors import (
    LAB,
    RGB,
    ImageBuffer,
    from_working,
    lab_to_rgb,
    load_image,
    rgb_to_lab,
    save_image,
    to_working,
)

rgb_channel = st.floats(0.0, 1.0, allow_nan=False)
rgb_triples = st.tuples(rgb_channel, rgb_channel, rgb_channel)


def test_white_maps_to_L100():
    # the published 7-digit sRGB matrix carries ~1e-7 rounding in its rows
    L, a, b = rgb_to_lab([1.0, 1.0, 1.0])
    assert abs(L - 100.0) < 1e-4
    assert abs(a) < 0.01 and abs(b) < 0.01


def test_black_maps_to_L0():
    L, a, b = rgb_to_lab([0.0, 0.0, 0.0])
    assert abs(L) < 1e-9 and abs(a) < 1e-9 and abs(b) < 1e-9


def test_pure_red_reference_values():
    # Pinned against an independent reference conversion (D65, 2 deg).
    L, a, b = rgb_to_lab([1.0, 0.0, 0.0])
    assert abs(L - 53.2406) < 1e-3
    assert abs(a - 80.0923) < 1e-3
    assert abs(b - 67.2028) < 1e-3
    assert 50 < L < 56 and a > 70 and b > 60


def test_lab_white_inverse():
    assert np.abs(lab_to_rgb([100.0, 0.0, 0.0]) - 1.0).max() < 1e-3


def test_lab_black_inverse():
    assert np.abs(lab_to_rgb([0.0, 0.0, 0.0])).max() < 1e-9


def test_out_of_gamut_lab_clamps():
    rgb = lab_to_rgb([50.0, 80.0, 70.0])
    assert (rgb >= 0).all() and (rgb <= 1).all()
    # saturated red-ish; green channel pinned at the gamut boundary
    assert abs(rgb[0] - 0.9567) < 1e-3 and rgb[1] == 0.0


def test_roundtrip_1000_random_triples():
    rng = np.random.default_rng(0)
    x = rng.random((1000, 3))
    err = np.abs(lab_to_rgb(rgb_to_lab(x)) - x).max()
    assert err < 1e-3


@given(rgb_triples)
@settings(max_examples=200)
def test_roundtrip_property(c):
    x = np.array(c)
    assert np.abs(lab_to_rgb(rgb_to_lab(x)) - x).max() < 1e-3


@given(rgb_triples)
def test_working_space_roundtrip_lab(c):
    x = np.array(c)
    assert np.abs(from_working(to_working(x, LAB), LAB) - x).max() < 1e-3


def test_working_space_rgb_is_identity():
    x = np.random.default_rng(1).random((17, 3))
    assert np.array_equal(to_working(x, RGB), x)
    assert np.array_equal(from_working(x, RGB), x)
    # idempotent normalisation
    assert np.array_equal(to_working(to_working(x, RGB), RGB), x)


def test_working_lab_range():
    corners = np.array([[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)], float)
    w = to_working(corners, LAB)
    assert (w[:, 0] >= 0).all() and (w[:, 0] <= 1 + 1e-6).all()
    assert (np.abs(w[:, 1:]) <= 1.0).all()


def test_unknown_space_rejected():
    with pytest.raises(ValueError):
        to_working(np.zeros(3), "hsv")


class TestImageBuffer:
    def test_shape_validation(self):
        with pytest.raises(ValueError):
            ImageBuffer(np.zeros((4, 4)))

    def test_space_validation(self):
        with pytest.raises(ValueError):
            ImageBuffer(np.zeros((2, 2, 3)), "xyz")

    def test_dims(self):
        buf = ImageBuffer(np.zeros((5, 7, 3)))
        assert buf.height == 5 and buf.width == 7
        assert buf.flat().shape == (35, 3)


class TestImageIO:
    def test_png_roundtrip_8bit(self, tmp_path):
        vals = np.arange(12, dtype=np.float64).reshape(2, 2, 3) / 255.0
        path = tmp_path / "t.png"
        save_image(ImageBuffer(vals), path)
        back = load_image(path)
        assert np.array_equal(np.rint(back.pixels * 255), np.rint(vals * 255))

    def test_load_missing_path(self, tmp_path):
        path = tmp_path / "missing.png"
        with pytest.raises(ValueError, match="missing.png"):
            load_image(path)

    def test_load_16bit_png(self, tmp_path):
        raw = np.array([[[1000, 2000, 3000], [0, 32768, 65535]]], dtype=np.uint16)
        path = tmp_path / "deep.png"
        cv2.imwrite(str(path), raw[:, :, ::-1])
        buf = load_image(path)
        assert np.allclose(buf.pixels, raw / 65535.0)

    def test_greyscale_broadcasts(self, tmp_path):
        raw = np.array([[7, 200]], dtype=np.uint8)
        path = tmp_path / "grey.png"
        cv2.imwrite(str(path), raw)
        buf = load_image(path)
        assert buf.pixels.shape == (1, 2, 3)
        assert np.allclose(buf.pixels[0, 0], 7 / 255.0)
