"""Colour representations, sRGB<->CIELAB conversion, and image raster I/O.

All pipeline math runs on float64 channels. RGB images are normalised to
[0,1] on load; Lab values are rescaled (L/100, a/128, b/128) before
clustering/estimation so both working spaces occupy a comparable numeric
range, and rescaled back on output.
"""

from dataclasses import dataclass

import cv2
import numpy as np

RGB = "rgb"
LAB = "lab"
SPACES = (RGB, LAB)

# sRGB (D65) <-> XYZ, IEC 61966-2-1 primaries.
_RGB2XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_XYZ2RGB = np.linalg.inv(_RGB2XYZ)
_WHITE_D65 = np.array([0.95047, 1.0, 1.08883])

# Working-scale divisors for Lab channels.
_LAB_SCALE = np.array([100.0, 128.0, 128.0])


@dataclass(frozen=True)
class ImageBuffer:
    """Dense H x W x 3 raster of colour triples with a space tag."""

    pixels: np.ndarray  # float64, shape (height, width, 3)
    space: str = RGB

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) pixel array, got {px.shape}")
        if self.space not in SPACES:
            raise ValueError(f"unknown colour space {self.space!r}")
        object.__setattr__(self, "pixels", px)
        px.setflags(write=False)

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]

    def flat(self):
        """Pixels as an (N, 3) view, row-major."""
        return self.pixels.reshape(-1, 3)


def _srgb_to_linear(c):
    c = np.asarray(c, dtype=np.float64)
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def _linear_to_srgb(c):
    c = np.asarray(c, dtype=np.float64)
    c = np.maximum(c, 0.0)
    return np.where(c <= 0.0031308, 12.92 * c, 1.055 * c ** (1 / 2.4) - 0.055)


def _lab_f(t):
    d = 6.0 / 29.0
    return np.where(t > d**3, np.cbrt(t), t / (3 * d * d) + 4.0 / 29.0)


def _lab_f_inv(t):
    d = 6.0 / 29.0
    return np.where(t > d, t**3, 3 * d * d * (t - 4.0 / 29.0))


def rgb_to_lab(rgb):
    """sRGB in [0,1] -> CIELAB (L in [0,100], a/b roughly [-128,127]), D65 white.

    Accepts (..., 3) arrays; total function.
    """
    rgb = np.asarray(rgb, dtype=np.float64)
    xyz = _srgb_to_linear(rgb) @ _RGB2XYZ.T
    f = _lab_f(xyz / _WHITE_D65)
    L = 116.0 * f[..., 1] - 16.0
    a = 500.0 * (f[..., 0] - f[..., 1])
    b = 200.0 * (f[..., 1] - f[..., 2])
    return np.stack([L, a, b], axis=-1)


def lab_to_rgb(lab):
    """CIELAB -> sRGB clamped to [0,1] per channel (out-of-gamut values clip)."""
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    xyz = _lab_f_inv(np.stack([fx, fy, fz], axis=-1)) * _WHITE_D65
    return np.clip(_linear_to_srgb(xyz @ _XYZ2RGB.T), 0.0, 1.0)


def to_working(rgb, space):
    """Normalised RGB -> working-space coordinates used by clustering/estimation.

    RGB passes through; Lab is converted and rescaled channelwise so the
    working box is roughly the unit scale on every axis.
    """
    if space == RGB:
        return np.asarray(rgb, dtype=np.float64)
    if space == LAB:
        return rgb_to_lab(rgb) / _LAB_SCALE
    raise ValueError(f"unknown colour space {space!r}")


def from_working(values, space):
    """Inverse of to_working; always lands in clamped [0,1] RGB."""
    values = np.asarray(values, dtype=np.float64)
    if space == RGB:
        return values
    if space == LAB:
        return lab_to_rgb(values * _LAB_SCALE)
    raise ValueError(f"unknown colour space {space!r}")


def load_image(path):
    """Read a PNG/JPEG file into a float64 RGB ImageBuffer in [0,1].

    8-bit channels divide by 255, 16-bit PNG by 65535. Alpha is dropped,
    greyscale is broadcast to three channels.
    """
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise ValueError(f"cannot read image {path!r}")
    if raw.ndim == 2:
        raw = raw[:, :, None].repeat(3, axis=2)
    if raw.shape[2] == 4:
        raw = raw[:, :, :3]
    if raw.dtype == np.uint8:
        px = raw.astype(np.float64) / 255.0
    elif raw.dtype == np.uint16:
        px = raw.astype(np.float64) / 65535.0
    else:
        raise ValueError(f"unsupported pixel depth {raw.dtype} in {path!r}")
    return ImageBuffer(px[:, :, ::-1].copy(), RGB)  # BGR -> RGB


def save_image(buf, path):
    """Write an RGB ImageBuffer as an 8-bit image file (format by extension)."""
    if buf.space != RGB:
        raise ValueError(f"can only save RGB buffers, got {buf.space!r}")
    u8 = np.rint(np.clip(buf.pixels, 0.0, 1.0) * 255.0).astype(np.uint8)
    if not cv2.imwrite(str(path), u8[:, :, ::-1]):
        raise ValueError(f"cannot write image {path!r}")
