import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from palettewarp.clustering import (
    DEFAULT_K,
    DEFAULT_N,
    downsample_for_clustering,
    kmeans,
    sample_correspondences,
)
from palettewarp.colors import ImageBuffer


def three_blobs(n_per=200, seed=0):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.1, 0.1, 0.1], [0.5, 0.5, 0.5], [0.9, 0.9, 0.9]])
    pts = np.concatenate([c + 0.01 * rng.standard_normal((n_per, 3)) for c in centers])
    return pts, centers


def test_defaults():
    assert DEFAULT_K == 50
    assert DEFAULT_N == 50_000


def test_kmeans_recovers_separated_blobs():
    pts, truth = three_blobs()
    model = kmeans(pts, 3, seed=0)
    got = model.centers[np.argsort(model.centers[:, 0])]
    assert np.abs(got - truth).max() < 0.01
    assert model.counts.sum() == len(pts)


def test_kmeans_objective_non_increasing():
    rng = np.random.default_rng(3)
    pts = rng.random((2000, 3))
    model = kmeans(pts, 10, seed=1)
    obj = np.array(model.objective)
    assert (np.diff(obj) <= 1e-9 * np.abs(obj[:-1])).all()


def test_kmeans_deterministic_given_seed():
    rng = np.random.default_rng(4)
    pts = rng.random((1500, 3))
    a = kmeans(pts, 8, seed=11)
    b = kmeans(pts, 8, seed=11)
    assert np.array_equal(a.centers, b.centers)
    c = kmeans(pts, 8, seed=12)
    assert not np.array_equal(a.centers, c.centers)


def test_kmeans_duplicate_points_reduce_k():
    pts = np.tile(np.array([[0.2, 0.4, 0.6], [0.8, 0.1, 0.3]]), (50, 1))
    model = kmeans(pts, 5, seed=0)
    assert model.K == 2
    assert model.counts.sum() == len(pts)


def test_kmeans_k_exceeds_points():
    pts = np.random.default_rng(5).random((4, 3))
    model = kmeans(pts, 10, seed=0)
    assert model.K == 4


def test_kmeans_rejects_bad_k():
    pts = np.zeros((10, 3))
    with pytest.raises(ValueError):
        kmeans(pts, 0, seed=0)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=15, deadline=None)
def test_kmeans_counts_partition_everything(seed):
    pts = np.random.default_rng(seed).random((300, 3))
    model = kmeans(pts, 7, seed=seed)
    assert model.counts.sum() == 300
    assert (model.counts > 0).all()


class TestDownsample:
    def test_small_image_untouched(self):
        buf = ImageBuffer(np.random.default_rng(0).random((100, 200, 3)))
        out = downsample_for_clustering(buf)
        assert out.pixels is buf.pixels

    def test_large_image_fits_budget(self):
        buf = ImageBuffer(np.zeros((1400, 920, 3)))
        out = downsample_for_clustering(buf)
        assert out.width <= 300 and out.height <= 350
        # aspect ratio preserved within rounding
        assert abs(out.height / out.width - 1400 / 920) < 0.05

    def test_values_preserved_for_constant_image(self):
        buf = ImageBuffer(np.full((700, 700, 3), 0.43))
        out = downsample_for_clustering(buf)
        assert np.abs(out.pixels - 0.43).max() < 1e-6


class TestCorrespondences:
    def make_pair(self, w=64, h=32, seed=0):
        rng = np.random.default_rng(seed)
        t = ImageBuffer(rng.random((h, w, 3)))
        p = ImageBuffer(rng.random((h, w, 3)))
        return t, p

    def test_zero_shift_pairs_align(self):
        t, p = self.make_pair()
        cs = sample_correspondences(t, p, n=100, seed=3, shift_px=0)
        assert cs.n == 100
        # every target sample must be an actual pixel of t, palette of p
        flat_t = t.flat()
        for row in cs.target:
            assert (np.abs(flat_t - row).max(axis=1) < 1e-12).any()

    def test_shift_misaligns_pairs(self):
        t, p = self.make_pair()
        a = sample_correspondences(t, p, n=500, seed=3, shift_px=0)
        b = sample_correspondences(t, p, n=500, seed=3, shift_px=5)
        assert not np.array_equal(a.target, b.target)
        # a shifted pairing is no longer pixel-aligned with the palette draw
        assert not np.array_equal(b.target, b.palette)

    def test_shift_bounds(self):
        t, p = self.make_pair(w=16)
        with pytest.raises(ValueError):
            sample_correspondences(t, p, n=10, seed=0, shift_px=16)
        with pytest.raises(ValueError):
            sample_correspondences(t, p, n=10, seed=0, shift_px=-1)

    def test_dims_must_match(self):
        t, _ = self.make_pair(w=64)
        _, p = self.make_pair(w=63)
        with pytest.raises(ValueError):
            sample_correspondences(t, p, n=10, seed=0)

    def test_deterministic(self):
        t, p = self.make_pair()
        a = sample_correspondences(t, p, n=64, seed=9, shift_px=2)
        b = sample_correspondences(t, p, n=64, seed=9, shift_px=2)
        assert np.array_equal(a.target, b.target)
        assert np.array_equal(a.palette, b.palette)

    def test_requesting_more_than_area_resamples(self):
        t, p = self.make_pair(w=8, h=8)
        cs = sample_correspondences(t, p, n=100, seed=1, shift_px=0)
        assert cs.n == 100
