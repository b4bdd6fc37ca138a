"""PSNR and SSIM between recoloured images and ground truth.

PSNR runs over all channels of the normalised [0,1] values with a 100 dB
cap; SSIM is the mean local index on the Rec. 601 luma channel under an
11x11 Gaussian window (sigma 1.5), constants K1=0.01, K2=0.03, range 1.0.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

_LUMA = np.array([0.299, 0.587, 0.114])

PSNR_CAP = 100.0
SSIM_WIN = 11
SSIM_SIGMA = 1.5
SSIM_K1, SSIM_K2 = 0.01, 0.03


@dataclass(frozen=True)
class MetricReport:
    psnr: float
    ssim: float

    def line(self):
        return f"psnr={self.psnr:.4f} ssim={self.ssim:.6f}"


def _check_dims(a, b):
    if a.pixels.shape != b.pixels.shape:
        raise ValueError(
            f"image dimensions differ: {a.pixels.shape} vs {b.pixels.shape}"
        )


def psnr(a, b):
    """10 log10(1 / MSE) over all channels, capped at 100 dB."""
    _check_dims(a, b)
    mse = ((a.pixels - b.pixels) ** 2).mean()
    if mse == 0.0:
        return PSNR_CAP
    return min(10.0 * np.log10(1.0 / mse), PSNR_CAP)


def _gaussian_kernel():
    half = SSIM_WIN // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(x**2) / (2.0 * SSIM_SIGMA**2))
    return k / k.sum()


def _windowed(field, kernel):
    smoothed = correlate1d(field, kernel, axis=0, mode="constant")
    return correlate1d(smoothed, kernel, axis=1, mode="constant")


def ssim(a, b):
    """Mean local SSIM on luma; windows fully inside the image (valid crop)."""
    _check_dims(a, b)
    h, w = a.pixels.shape[:2]
    if min(h, w) < SSIM_WIN:
        raise ValueError(f"images must be at least {SSIM_WIN}px per side for SSIM")
    x = a.pixels @ _LUMA
    y = b.pixels @ _LUMA
    k = _gaussian_kernel()
    mu_x = _windowed(x, k)
    mu_y = _windowed(y, k)
    sxx = _windowed(x * x, k) - mu_x * mu_x
    syy = _windowed(y * y, k) - mu_y * mu_y
    sxy = _windowed(x * y, k) - mu_x * mu_y
    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    smap = ((2 * mu_x * mu_y + c1) * (2 * sxy + c2)) / (
        (mu_x**2 + mu_y**2 + c1) * (sxx + syy + c2)
    )
    half = SSIM_WIN // 2
    return float(smap[half : h - half, half : w - half].mean())


def report(result, reference):
    return MetricReport(psnr(result, reference), ssim(result, reference))
