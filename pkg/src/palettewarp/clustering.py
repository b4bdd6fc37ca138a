"""GMM mean selection: K-means cluster centres, and sampled pixel
correspondences for aligned image pairs (including the shifted-sampling
robustness protocol)."""

from dataclasses import dataclass, field

import cv2
import numpy as np

from .colors import ImageBuffer

DEFAULT_K = 50
DEFAULT_N = 50_000
DOWNSAMPLE_W, DOWNSAMPLE_H = 300, 350


@dataclass(frozen=True)
class ClusterModel:
    centers: np.ndarray  # (K, 3)
    counts: np.ndarray  # (K,) members per centre at convergence
    objective: tuple = ()  # recorded SSE per Lloyd iteration

    @property
    def K(self):
        return len(self.centers)


@dataclass(frozen=True)
class CorrespondenceSet:
    """Index-aligned colour pairs sampled from an aligned image pair."""

    target: np.ndarray  # (n, 3)
    palette: np.ndarray  # (n, 3)
    seed: int = 0

    @property
    def n(self):
        return len(self.target)


def downsample_for_clustering(img, max_w=DOWNSAMPLE_W, max_h=DOWNSAMPLE_H):
    """Aspect-preserving box-filter downsample to fit (max_w, max_h); no-op
    when the image already fits."""
    if max_w < 1 or max_h < 1:
        raise ValueError("downsample bounds must be >= 1")
    scale = min(max_w / img.width, max_h / img.height)
    if scale >= 1.0:
        return img
    new_w = max(1, round(img.width * scale))
    new_h = max(1, round(img.height * scale))
    small = cv2.resize(img.pixels, (new_w, new_h), interpolation=cv2.INTER_AREA)
    return ImageBuffer(small, img.space)


def _kmeans_pp_init(points, K, rng):
    """Seeded k-means++ centre selection."""
    centers = np.empty((K, 3))
    centers[0] = points[rng.integers(len(points))]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for k in range(1, K):
        total = d2.sum()
        if total <= 0.0:  # all remaining points coincide with a centre
            centers[k:] = centers[0]
            return centers
        centers[k] = points[rng.choice(len(points), p=d2 / total)]
        d2 = np.minimum(d2, ((points - centers[k]) ** 2).sum(axis=1))
    return centers


def kmeans(points, K, seed=0, max_iters=200, rel_tol=1e-6):
    """Lloyd iterations from a seeded k-means++ start.

    The recorded objective (sum of squared distances to assigned centres) is
    non-increasing; iteration stops when its relative change drops below
    rel_tol. K is silently reduced to the number of distinct points when it
    exceeds them; emptied centres are re-seeded at the point farthest from
    the emptied centre's previous position.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if K < 1:
        raise ValueError(f"need K >= 1 clusters, got {K}")
    if len(points) == 0:
        raise ValueError("kmeans needs at least one point")
    n_distinct = len(np.unique(points, axis=0))
    K = min(K, n_distinct)
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(points, K, rng)

    pp2 = (points**2).sum(axis=1)

    def dist2(cents):
        d2 = pp2[:, None] + (cents**2).sum(axis=1)[None, :] - 2.0 * points @ cents.T
        return np.maximum(d2, 0.0, out=d2)

    objective = []
    for _ in range(max_iters):
        d2 = dist2(centers)
        assign = d2.argmin(axis=1)
        sse = d2[np.arange(len(points)), assign].sum()
        objective.append(sse)
        for k in range(K):
            members = assign == k
            if members.any():
                centers[k] = points[members].mean(axis=0)
            else:
                centers[k] = points[d2[:, k].argmax()]
        if len(objective) > 1 and objective[-2] - sse <= rel_tol * objective[-2]:
            break
        if sse == 0.0:
            break

    d2 = dist2(centers)
    assign = d2.argmin(axis=1)
    counts = np.bincount(assign, minlength=K)
    return ClusterModel(centers, counts, tuple(objective))


def sample_correspondences(target, palette, n, seed=0, shift_px=0):
    """Sample n pixel pairs from the overlap of a horizontally shifted target
    with the aligned palette.

    Pair k = (target pixel at the shifted location, palette pixel at the
    location); shift_px = 0 is plain aligned sampling. Locations are drawn
    uniformly without replacement (with replacement only if n exceeds the
    overlap area). Deterministic given seed.
    """
    if (target.height, target.width) != (palette.height, palette.width):
        raise ValueError(
            f"aligned images must share dimensions, got "
            f"{target.width}x{target.height} vs {palette.width}x{palette.height}"
        )
    if n < 1:
        raise ValueError("need n >= 1 correspondences")
    if not 0 <= shift_px < target.width:
        raise ValueError(f"shift_px must be in [0, width), got {shift_px}")
    ov_w = target.width - shift_px
    area = ov_w * target.height
    rng = np.random.default_rng(seed)
    idx = rng.choice(area, size=n, replace=n > area)
    ys, xs = idx // ov_w, idx % ov_w
    return CorrespondenceSet(
        target.pixels[ys, xs + shift_px].copy(),
        palette.pixels[ys, xs].copy(),
        seed=seed,
    )
