#!/usr/bin/env python3
"""Recolouring and estimation timing benchmark.

Times warp application on an HD image for every RBF kernel across thread
counts, and (optionally) warp estimation at the default problem size
(K = 50 mixture components per image). Mirrors the desk-scale performance
targets the package is tuned for: TPS recolouring of a 1920x1080 frame in a
few seconds on a multi-core machine, estimation in single-digit seconds.

Usage:
    python3 scripts/benchmark_recolor.py
    python3 scripts/benchmark_recolor.py --threads 1 2 4 8 --repeats 3
    python3 scripts/benchmark_recolor.py --skip-estimation
"""

import argparse
import os
import sys
import time

import numpy as np

from palettewarp import synth
from palettewarp.clustering import kmeans
from palettewarp.colors import RGB, ImageBuffer
from palettewarp.estimator import (
    MODE_CORR,
    MODE_NOCORR,
    EstimationConfig,
    estimate_theta,
)
from palettewarp.gmm import IsotropicGmm, PairedGmms
from palettewarp.recolor import apply
from palettewarp.warp import (
    GAUSSIAN,
    INVERSE_MULTIQUADRIC,
    INVERSE_QUADRIC,
    TPS,
    ControlGrid,
    RbfKind,
    identity_warp,
    warp_from_theta,
)

KERNELS = ((TPS, None), (GAUSSIAN, 6e-3), (INVERSE_MULTIQUADRIC, 6e-3), (INVERSE_QUADRIC, 6e-3))


def bench_warp(kind, eps, rng):
    """A non-trivial warp of the given kind (identity plus RBF jitter)."""
    rbf = RbfKind(kind, eps)
    grid = ControlGrid()
    th = identity_warp(grid, rbf).theta.copy()
    th[12:] += 0.02 * rng.standard_normal(3 * grid.m)
    return warp_from_theta(th, grid, rbf)


def time_apply(w, img, threads, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        apply(w, img, threads=threads)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_recolor(args):
    rng = np.random.default_rng(77)
    img = ImageBuffer(np.random.default_rng(1234).random((args.height, args.width, 3)))
    print(f"recolouring {args.width}x{args.height}, best of {args.repeats} "
          f"(os.cpu_count()={os.cpu_count()})")
    header = f"{'kernel':>10} " + " ".join(f"{t:>7d}t" for t in args.threads)
    print(header)
    for kind, eps in KERNELS:
        w = bench_warp(kind, eps, rng)
        times = [time_apply(w, img, t, args.repeats) for t in args.threads]
        print(f"{kind:>10} " + " ".join(f"{s:>7.2f}s" for s in times))


def bench_estimation(args):
    scene = synth.make_scene(256, 256, seed=3, cells=12, noise=0.02)
    palette = synth.shift_palette(scene)
    flat_t = scene.reshape(-1, 3)
    flat_p = palette.reshape(-1, 3)
    k = 50
    print(f"\nestimation (tps/rgb, K={k}):")
    for mode in (MODE_NOCORR, MODE_CORR):
        cfg = EstimationConfig.for_setup(TPS, RGB, mode)
        if mode == MODE_CORR:
            rng = np.random.default_rng(0)
            idx = rng.integers(0, len(flat_t), 50_000)
            mt, mp = flat_t[idx], flat_p[idx]
        else:
            mt = kmeans(flat_t, k, seed=0).centers
            mp = kmeans(flat_p, k, seed=0).centers
        gmms = PairedGmms(
            IsotropicGmm(mt, cfg.hmax), IsotropicGmm(mp, cfg.hmax), paired=mode == MODE_CORR
        )
        t0 = time.perf_counter()
        _, diag = estimate_theta(gmms, cfg)
        iters = sum(st.iterations for st in diag.stages)
        print(f"  mode={mode:<7} K/n={len(mt):>6d}  {time.perf_counter() - t0:5.1f}s"
              f"  ({len(diag.stages)} stages, {iters} inner iterations)")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--width", type=int, default=1920)
    ap.add_argument("--height", type=int, default=1080)
    ap.add_argument("--threads", type=int, nargs="+", default=[1, 2, 4, 8])
    ap.add_argument("--repeats", type=int, default=2)
    ap.add_argument("--skip-estimation", action="store_true")
    args = ap.parse_args(argv)

    bench_recolor(args)
    if not args.skip_estimation:
        bench_estimation(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
