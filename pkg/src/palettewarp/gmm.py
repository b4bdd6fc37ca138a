"""Isotropic Gaussian-mixture colour models and the closed-form Gaussian
integrals behind the L2 registration cost.

Every mixture uses equal weights 1/K and a shared isotropic covariance
h^2 I, so the scalar product of two components is the single evaluation
N(0; mu1 - mu2, 2 h^2 I) and all cost terms reduce to sums of those.

With correspondences the target and palette carry one component per sampled
pair and the L2 distance decomposes over index-aligned pairs: both double
sums restrict to the diagonal, which turns the target entropy into the
theta-independent constant (4 pi h^2)^{-3/2} / n and leaves a robust
per-pair matching energy (see cross_term / entropy_term).
"""

from dataclasses import dataclass, replace

import numpy as np

from .warp import eval_warp


@dataclass(frozen=True)
class IsotropicGmm:
    """Mixture means with shared bandwidth h and implicit equal weights 1/K."""

    means: np.ndarray  # (K, 3)
    h: float

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64)
        if means.ndim != 2 or means.shape[1] != 3 or len(means) == 0:
            raise ValueError(f"means must be a (K, 3) array, got shape {means.shape}")
        if self.h <= 0:
            raise ValueError(f"bandwidth must be positive, got {self.h}")
        means = means.copy()
        means.setflags(write=False)
        object.__setattr__(self, "means", means)

    @property
    def K(self):
        return len(self.means)


@dataclass(frozen=True)
class PairedGmms:
    """Target/palette mixture pair; paired=True means the means are
    index-aligned correspondences with K_t = K_p = n."""

    target: IsotropicGmm
    palette: IsotropicGmm
    paired: bool = False

    def __post_init__(self):
        if self.paired and self.target.K != self.palette.K:
            raise ValueError("paired mixtures must have equal component counts")
        if self.target.h != self.palette.h:
            raise ValueError("target and palette share a single bandwidth")

    @property
    def h(self):
        return self.target.h

    def with_bandwidth(self, h):
        return PairedGmms(
            replace(self.target, h=h), replace(self.palette, h=h), self.paired
        )


def gaussian_scalar_product(mu1, mu2, h):
    """Integral of the product of two isotropic Gaussians with equal
    bandwidth: N(0; mu1 - mu2, 2 h^2 I) = (4 pi h^2)^{-3/2} exp(-|d|^2/(4 h^2)).

    Vectorises over leading axes of mu1/mu2.
    """
    if h <= 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    d = np.asarray(mu1, dtype=np.float64) - np.asarray(mu2, dtype=np.float64)
    d2 = (d * d).sum(axis=-1)
    return (4.0 * np.pi * h * h) ** -1.5 * np.exp(-d2 / (4.0 * h * h))


def _pairwise_products(a, b, h):
    """Matrix of gaussian_scalar_product over all rows of a x rows of b."""
    d2 = (
        (a**2).sum(axis=1)[:, None]
        + (b**2).sum(axis=1)[None, :]
        - 2.0 * a @ b.T
    )
    np.maximum(d2, 0.0, out=d2)
    return (4.0 * np.pi * h * h) ** -1.5 * np.exp(-d2 / (4.0 * h * h))


def cross_term(gmms, warp):
    """<p_t | p_p> with the target means pushed through the warp.

    Unpaired: the full K_t x K_p double sum weighted 1/(K_t K_p).
    Paired: the correspondence restriction — the single sum over the n
    index-aligned pairs with the same 1/n^2 weights, O(n).
    """
    y = eval_warp(warp, gmms.target.means)
    h = gmms.h
    if gmms.paired:
        vals = gaussian_scalar_product(y, gmms.palette.means, h)
        return float(vals.sum()) / gmms.target.K ** 2
    prods = _pairwise_products(y, gmms.palette.means, h)
    return float(prods.sum()) / (gmms.target.K * gmms.palette.K)


def entropy_term(gmm, warp=None, paired=False):
    """Quadratic entropy |p_t|^2 of the (warped) mixture.

    Full mode: the K x K double sum weighted 1/K^2. Paired mode restricts to
    the diagonal like the paired cross term; every self-difference is zero,
    so the value is the theta-independent constant (4 pi h^2)^{-3/2} / K.
    """
    if paired:
        return (4.0 * np.pi * gmm.h**2) ** -1.5 / gmm.K
    y = gmm.means if warp is None else eval_warp(warp, gmm.means)
    prods = _pairwise_products(y, y, gmm.h)
    return float(prods.sum()) / gmm.K**2
