"""Procedurally generated test scenes and a known global colour shift.

The scenes combine smooth gradients, soft colour blobs, and (optionally)
hard-edged Voronoi patches, horizontal colour bands, and pixel noise. The
banded/hard-edged content matters for the shifted-correspondence protocol:
shifting the sampling grid turns a growing fraction of correspondences into
systematically wrong pairs, so estimation quality degrades smoothly with
the shift instead of hiding inside the robust loss.
"""

import numpy as np


def make_scene(
    width=256,
    height=256,
    seed=42,
    blobs=6,
    cells=0,
    noise=0.0,
    band_amp=0.0,
    band_period=64,
):
    """An RGB float scene in [0.02, 0.98].

    blobs: soft Gaussian colour splotches; cells: hard-edged Voronoi patches
    with per-patch colour offsets; band_amp/band_period: horizontal
    sinusoidal colour bands; noise: per-pixel uniform colour jitter.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width]
    u, v = xx / (width - 1), yy / (height - 1)
    img = np.stack([0.15 + 0.6 * u, 0.25 + 0.45 * v, 0.75 - 0.5 * u], axis=-1)

    for _ in range(blobs):
        cx, cy, s = rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0.05, 0.2)
        col = rng.uniform(-0.25, 0.25, 3)
        img += np.exp(-((u - cx) ** 2 + (v - cy) ** 2) / (2 * s * s))[..., None] * col

    if cells:
        sites = rng.uniform(0, 1, (cells, 2))
        offsets = rng.uniform(-0.2, 0.2, (cells, 3))
        pts = np.stack([u.ravel(), v.ravel()], axis=1)
        d2 = ((pts[:, None, :] - sites[None, :, :]) ** 2).sum(axis=2)
        img += offsets[d2.argmin(axis=1)].reshape(height, width, 3)

    texture_rng = np.random.default_rng(seed + 99)
    if band_amp:
        direction = texture_rng.uniform(-1, 1, 3)
        direction /= np.abs(direction).max()
        phase = 2 * np.pi * xx[..., None] / band_period
        img += band_amp * np.sin(phase) * direction

    if noise:
        img += texture_rng.uniform(-noise, noise, img.shape)

    return np.clip(img, 0.02, 0.98)


def correspondence_scene(width=256, height=256, seed=42):
    """The textured scene used by the shifted-correspondence protocol."""
    return make_scene(
        width, height, seed, cells=25, noise=0.03, band_amp=0.18, band_period=40
    )


def shift_palette(img):
    """The known global colour shift: smooth monotone per-channel curves."""
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    return np.stack(
        [
            np.clip(0.1 + 0.8 * r**0.8, 0, 1),
            np.clip(0.9 * g + 0.05, 0, 1),
            np.clip(0.15 + 0.7 * b**1.2, 0, 1),
        ],
        axis=-1,
    )
