"""Command-line pipeline: clustering/correspondences -> estimation ->
application -> evaluation -> mixing.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import clustering, estimator, metrics, recolor, warp
from .colors import LAB, RGB, ImageBuffer, load_image, save_image, to_working
from .gmm import IsotropicGmm, PairedGmms

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

_RBF_FOR_FLAG = {
    "tps": warp.TPS,
    "gaussian": warp.GAUSSIAN,
    "imq": warp.INVERSE_MULTIQUADRIC,
    "iq": warp.INVERSE_QUADRIC,
}
_MODE_FOR_FLAG = {"kmeans": estimator.MODE_NOCORR, "corr": estimator.MODE_CORR}


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; we reserve 2 for
    data errors and use 1 for usage."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser():
    p = _Parser(prog="palettewarp", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="fit a colour-space warp from image pair")
    _add_estimate_args(est)
    est.add_argument("-o", "--out", required=True, help="output warp file")

    app = sub.add_parser("apply", help="recolour image(s) with a stored warp")
    app.add_argument("warp")
    app.add_argument("input", help="image file or directory of frames")
    app.add_argument("-o", "--out", required=True, help="output file or directory")
    app.add_argument("--space", choices=["rgb", "lab"], default=None,
                     help="require the warp to use this working space")
    app.add_argument("--threads", type=int, default=None)

    mix = sub.add_parser("mix", help="blend two warps spatially or over time")
    mix.add_argument("warp1")
    mix.add_argument("warp2")
    mix.add_argument("input", help="image file or directory of frames")
    mix.add_argument("-o", "--out", required=True)
    mix.add_argument("--mask", default=None, help="greyscale blend mask")
    mix.add_argument("--gamma", default=None,
                     help="constant blend weight, or a schedule file (one weight per line)")
    mix.add_argument("--threads", type=int, default=None)

    met = sub.add_parser("metrics", help="PSNR/SSIM of a result against a reference")
    met.add_argument("result")
    met.add_argument("reference")
    met.add_argument("--csv", default=None, help="append one CSV row to this file")

    pipe = sub.add_parser("pipeline", help="estimate then recolour in one run")
    _add_estimate_args(pipe)
    pipe.add_argument("-o", "--out", required=True, help="output image")
    pipe.add_argument("--save-warp", default=None, help="also store the warp file")
    pipe.add_argument("--threads", type=int, default=None)
    return p


def _add_estimate_args(p):
    p.add_argument("target")
    p.add_argument("palette")
    p.add_argument("--space", choices=["rgb", "lab"], default="rgb")
    p.add_argument("--rbf", choices=list(_RBF_FOR_FLAG), default="tps")
    p.add_argument("--mode", choices=["kmeans", "corr"], default="kmeans")
    p.add_argument("--k", type=int, default=clustering.DEFAULT_K)
    p.add_argument("--n", type=int, default=clustering.DEFAULT_N)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shift", type=int, default=0,
                   help="horizontal sampling shift in px (robustness protocol)")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--hmax", type=float, default=None)
    p.add_argument("--hmin", type=float, default=None)
    p.add_argument("--verbose", action="store_true", help="full per-iteration log")


def _estimate(args):
    target = load_image(args.target)
    palette = load_image(args.palette)
    mode = _MODE_FOR_FLAG[args.mode]
    rbf_kind = _RBF_FOR_FLAG[args.rbf]
    cfg = estimator.EstimationConfig.for_setup(
        rbf_kind, args.space, mode,
        lam=args.lam, eps=args.epsilon, hmax=args.hmax, hmin=args.hmin,
    )
    rbf = warp.RbfKind(rbf_kind, cfg.eps)
    eps_text = "-" if cfg.eps is None else f"{cfg.eps:g}"
    print(
        f"config: rbf={rbf_kind} space={args.space} mode={mode} "
        f"lambda={cfg.lam:g} epsilon={eps_text}"
    )

    if mode == estimator.MODE_NOCORR:
        mt = _cluster_means(target, args.space, args.k, args.seed)
        mp = _cluster_means(palette, args.space, args.k, args.seed)
        gmms = PairedGmms(
            IsotropicGmm(mt, cfg.hmax), IsotropicGmm(mp, cfg.hmax), paired=False
        )
    else:
        corr = clustering.sample_correspondences(
            target, palette, args.n, seed=args.seed, shift_px=args.shift
        )
        gmms = PairedGmms(
            IsotropicGmm(to_working(corr.target, args.space), cfg.hmax),
            IsotropicGmm(to_working(corr.palette, args.space), cfg.hmax),
            paired=True,
        )

    fitted, diag = estimator.estimate_theta(gmms, cfg, rbf=rbf, space=args.space)
    if args.verbose:
        print(diag.to_text(), end="")
    else:
        for rec in diag.stages:
            print(
                f"stage {rec.stage}: h={rec.h:.4g} iterations={rec.iterations} "
                f"cost {rec.totals[0]:.6g} -> {rec.totals[-1]:.6g}"
            )
    return fitted


def _cluster_means(img, space, k, seed):
    small = clustering.downsample_for_clustering(img)
    model = clustering.kmeans(to_working(small.pixels, space).reshape(-1, 3), k, seed)
    return model.centers


def _image_paths(input_path):
    path = Path(input_path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.is_file())
        if not files:
            raise ValueError(f"no frames found in directory {input_path!r}")
        return files, True
    return [path], False


def _out_path(out, src, is_dir):
    if is_dir:
        os.makedirs(out, exist_ok=True)
        return Path(out) / src.name
    parent = Path(out).parent
    if str(parent) not in ("", "."):
        os.makedirs(parent, exist_ok=True)
    return Path(out)


def _cmd_estimate(args):
    fitted = _estimate(args)
    warp.save_warp(fitted, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_apply(args):
    w = warp.load_warp(args.warp)
    if args.space is not None and args.space != w.space:
        raise ValueError(
            f"warp works in {w.space!r} but the pipeline requested {args.space!r}"
        )
    paths, is_dir = _image_paths(args.input)
    for src in paths:
        out = recolor.recolor_image(w, load_image(src), threads=args.threads)
        save_image(out, _out_path(args.out, src, is_dir))
    print(f"recoloured {len(paths)} image(s)")
    return EXIT_OK


def _parse_gamma(value):
    try:
        return [float(value)], True
    except ValueError:
        pass
    schedule = [float(line) for line in Path(value).read_text().split()]
    if not schedule:
        raise ValueError(f"empty gamma schedule {value!r}")
    return schedule, False


def _cmd_mix(args):
    w1 = warp.load_warp(args.warp1)
    w2 = warp.load_warp(args.warp2)
    paths, is_dir = _image_paths(args.input)
    if (args.mask is None) == (args.gamma is None):
        raise ValueError("mix needs exactly one of --mask or --gamma")

    if args.mask is not None:
        mask = recolor.load_mask(args.mask)
        for src in paths:
            img = load_image(src)
            working = recolor.to_working_buffer(img, w1.space)
            mixed = recolor.apply_mixed(w1, w2, mask, working, threads=args.threads)
            save_image(recolor.to_rgb_buffer(mixed), _out_path(args.out, src, is_dir))
    else:
        schedule, constant = _parse_gamma(args.gamma)
        if not constant and len(schedule) != len(paths):
            raise ValueError(
                f"gamma schedule has {len(schedule)} entries for {len(paths)} frames"
            )
        if constant:
            schedule = schedule * len(paths)
        for g, src in zip(schedule, paths):
            mixed = warp.interpolate([w1, w2], [g, 1.0 - g])
            out = recolor.recolor_image(mixed, load_image(src), threads=args.threads)
            save_image(out, _out_path(args.out, src, is_dir))
    print(f"mixed {len(paths)} image(s)")
    return EXIT_OK


def _cmd_metrics(args):
    rep = metrics.report(load_image(args.result), load_image(args.reference))
    print(rep.line())
    if args.csv:
        new = not os.path.exists(args.csv)
        with open(args.csv, "a", encoding="utf-8") as f:
            if new:
                f.write("result,reference,psnr,ssim\n")
            f.write(f"{args.result},{args.reference},{rep.psnr:.4f},{rep.ssim:.6f}\n")
    return EXIT_OK


def _cmd_pipeline(args):
    fitted = _estimate(args)
    if args.save_warp:
        warp.save_warp(fitted, args.save_warp)
    out = recolor.recolor_image(fitted, load_image(args.target), threads=args.threads)
    save_image(out, _out_path(args.out, Path(args.target), False))
    print(f"wrote {args.out}")
    return EXIT_OK


_COMMANDS = {
    "estimate": _cmd_estimate,
    "apply": _cmd_apply,
    "mix": _cmd_mix,
    "metrics": _cmd_metrics,
    "pipeline": _cmd_pipeline,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse usage failure (or --help)
        return exc.code if exc.code is not None else EXIT_OK
    except FloatingPointError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
