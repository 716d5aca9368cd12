"""Command-line entry point: ``hybrid-stereo {run,batch,eval,make-fixtures}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .batch import batch_run, save_colorized
from .config import dump_config, load_config
from .core import (
    INVALID,
    DisparityMap,
    load_gray_image,
    load_kitti_disparity,
    load_mask,
    save_kitti_disparity,
)
from .evaluation import evaluate, interpolate_gaps
from .pipeline import run_pipeline_detailed
from .priors import write_anchors, write_off


def _add_config_args(p):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config field (repeatable)")


def _dump_intermediates(res, out_dir, dmax):
    os.makedirs(out_dir, exist_ok=True)
    maps = {
        "raster": res.raster,
        "reverse": res.reverse,
        "sparse": res.sparse,
        "support": res.support,
        "prior": res.prior,
        "final": res.disparity,
    }
    for name, d in maps.items():
        save_kitti_disparity(d, os.path.join(out_dir, f"{name}.png"))
        save_colorized(d, os.path.join(out_dir, f"{name}_viz.png"), dmax)
    write_anchors(res.anchors, os.path.join(out_dir, "anchors.txt"))
    write_off(res.triangulation, os.path.join(out_dir, "triangulation.off"))


def cmd_run(args) -> int:
    cfg = load_config(args.config, args.set)
    left = load_gray_image(args.left)
    right = load_gray_image(args.right)
    res = run_pipeline_detailed(left, right, cfg)
    disp = res.disparity
    if args.out:
        save_kitti_disparity(disp, args.out)
    if args.viz:
        save_colorized(disp, args.viz)
    if args.dump_intermediates:
        _dump_intermediates(res, args.dump_intermediates, cfg.disparity_range - 1)
    print(res.timings.report())
    if args.gt:
        gt = load_kitti_disparity(args.gt)
        fg = load_mask(args.fg) if args.fg else None
        result = evaluate(interpolate_gaps(disp), gt, fg, density=disp.density)
        print(json.dumps(result.as_dict(), sort_keys=True))
    return 0


def cmd_batch(args) -> int:
    cfg = load_config(args.config, args.set)
    aggregate, records, all_ok = batch_run(args.dataset, cfg, args.out, jobs=args.jobs,
                                           gt_subdir=args.gt_dir)
    done = sum(r["status"] == "ok" for r in records)
    print(f"processed {done}/{len(records)} pairs")
    if aggregate is not None:
        print(json.dumps(aggregate.as_dict(), sort_keys=True))
    return 0 if all_ok else 1


def cmd_eval(args) -> int:
    est = load_kitti_disparity(args.est)
    gt = load_kitti_disparity(args.gt)
    fg = load_mask(args.fg) if args.fg else None
    density = est.density
    if density < 1.0:
        est = interpolate_gaps(est)
    result = evaluate(est, gt, fg, density=density)
    print(json.dumps(result.as_dict(), sort_keys=True))
    return 0


def cmd_make_fixtures(args) -> int:
    from .synthetic import write_fixture_dataset

    names = write_fixture_dataset(args.out, count=args.count, width=args.width,
                                  height=args.height, seed=args.seed,
                                  with_gt=not args.no_gt)
    print(f"wrote {len(names)} pairs to {args.out}")
    return 0


def cmd_show_config(args) -> int:
    sys.stdout.write(dump_config(load_config(args.config, args.set)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybrid-stereo",
        description="SGM + ELAS-prior stereo pipeline with KITTI-style evaluation.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="process one stereo pair")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--out", help="16-bit KITTI disparity PNG to write")
    p.add_argument("--viz", help="color visualization PNG to write")
    p.add_argument("--gt", help="KITTI ground-truth disparity PNG to score against")
    p.add_argument("--fg", help="foreground object map for the bg/fg split")
    p.add_argument("--dump-intermediates", metavar="DIR",
                   help="write every intermediate map, anchors and triangulation")
    _add_config_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("batch", help="process a KITTI-layout directory")
    p.add_argument("dataset", help="directory with image_2/ and image_3/")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--gt-dir", default="disp_occ_0",
                   help="ground-truth subdirectory (default: disp_occ_0)")
    _add_config_args(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("eval", help="score a precomputed disparity PNG")
    p.add_argument("--est", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--fg")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("make-fixtures", help="write a synthetic KITTI-layout dataset")
    p.add_argument("out")
    p.add_argument("--count", type=int, default=3)
    p.add_argument("--width", type=int, default=320)
    p.add_argument("--height", type=int, default=120)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-gt", action="store_true")
    p.set_defaults(func=cmd_make_fixtures)

    p = sub.add_parser("config", help="print the effective configuration")
    _add_config_args(p)
    p.set_defaults(func=cmd_show_config)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
