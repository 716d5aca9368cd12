"""Batch processing of KITTI-layout directories.

Layout read::

    <root>/image_2/<name>   left images
    <root>/image_3/<name>   right images
    <root>/disp_occ_0/<name>  ground truth (optional)
    <root>/obj_map/<name>   foreground object map (optional)

Layout written::

    <out>/disp_0/<name>     16-bit KITTI disparity PNGs
    <out>/viz/<name>        color-mapped disparities
    <out>/metrics.jsonl     config record, one record per pair, aggregate record
    <out>/timings.jsonl     wall-clock timings (kept apart: they vary run to run)
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import numpy as np

from .config import PipelineConfig
from .core import (
    DisparityMap,
    load_gray_image,
    load_kitti_disparity,
    load_mask,
    save_kitti_disparity,
)
from .evaluation import EvalResult, evaluate, interpolate_gaps, mean_results
from .pipeline import run_pipeline

log = logging.getLogger(__name__)

IMAGE_EXTS = (".png", ".pgm")


def colorize(d: DisparityMap, dmax: Optional[float] = None) -> np.ndarray:
    """RGB rendering of a disparity map; INVALID pixels are black."""
    from matplotlib import colormaps

    dmax = d.dmax if dmax is None else dmax
    scaled = np.clip(np.where(d.valid, d.values, 0.0) / max(dmax, 1e-9), 0.0, 1.0)
    rgb = colormaps["magma"](scaled)[..., :3]
    rgb = np.rint(rgb * 255).astype(np.uint8)
    rgb[~d.valid] = 0
    return rgb


def save_colorized(d: DisparityMap, path, dmax: Optional[float] = None) -> None:
    from PIL import Image

    Image.fromarray(colorize(d, dmax), mode="RGB").save(os.fspath(path), format="PNG")


def list_pairs(root: str) -> list[str]:
    left_dir = os.path.join(root, "image_2")
    if not os.path.isdir(left_dir):
        raise FileNotFoundError(f"{left_dir} does not exist")
    return sorted(n for n in os.listdir(left_dir) if n.lower().endswith(IMAGE_EXTS))


def _process_pair(args):
    root, name, cfg, out_dir, gt_subdir = args
    record = {"pair": name}
    right_path = os.path.join(root, "image_3", name)
    if not os.path.isfile(right_path):
        record.update(status="skipped", reason="missing right image")
        return record, None, None
    try:
        left = load_gray_image(os.path.join(root, "image_2", name))
        right = load_gray_image(right_path)
        disp, timings = run_pipeline(left, right, cfg)
    except Exception as exc:  # reported per pair, the batch carries on
        record.update(status="failed", reason=f"{type(exc).__name__}: {exc}")
        return record, None, None

    stem = os.path.splitext(name)[0] + ".png"
    save_kitti_disparity(disp, os.path.join(out_dir, "disp_0", stem))
    save_colorized(disp, os.path.join(out_dir, "viz", stem))
    record.update(status="ok", density=disp.density)

    result = None
    gt_path = os.path.join(root, gt_subdir, name)
    if os.path.isfile(gt_path):
        gt = load_kitti_disparity(gt_path)
        mask_path = os.path.join(root, "obj_map", name)
        fg = load_mask(mask_path) if os.path.isfile(mask_path) else None
        result = evaluate(interpolate_gaps(disp), gt, fg, density=disp.density)
        record.update(result.as_dict())
    return record, result, timings.as_dict()


def batch_run(dataset_dir: str, cfg: Optional[PipelineConfig], output_dir: str,
              jobs: int = 1, gt_subdir: str = "disp_occ_0"):
    """Process every pair under ``dataset_dir``.

    Returns ``(aggregate, records, all_ok)`` where ``aggregate`` is ``None``
    when no pair had ground truth.
    """
    cfg = cfg or PipelineConfig()
    names = list_pairs(dataset_dir)
    os.makedirs(os.path.join(output_dir, "disp_0"), exist_ok=True)
    os.makedirs(os.path.join(output_dir, "viz"), exist_ok=True)

    tasks = [(dataset_dir, n, cfg, output_dir, gt_subdir) for n in names]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_process_pair, tasks))
    else:
        outcomes = [_process_pair(t) for t in tasks]

    records, results, timing_lines = [], [], []
    for record, result, timings in outcomes:
        records.append(record)
        if result is not None:
            results.append(result)
        if timings is not None:
            timing_lines.append({"pair": record["pair"], **timings})
        if record["status"] != "ok":
            log.warning("%s: %s (%s)", record["pair"], record["status"], record.get("reason"))

    aggregate: Optional[EvalResult] = mean_results(results) if results else None
    processed = sum(r["status"] == "ok" for r in records)
    summary = {
        "type": "aggregate",
        "pairs": len(records),
        "processed": processed,
        "skipped": len(records) - processed,
        "evaluated": len(results),
    }
    if aggregate is not None:
        summary.update(aggregate.as_dict())
    else:
        ok = [r["density"] for r in records if r["status"] == "ok"]
        if ok:
            summary["density"] = float(np.mean(ok))

    with open(os.path.join(output_dir, "metrics.jsonl"), "w") as f:
        f.write(json.dumps({"type": "config", **cfg.to_dict()}, sort_keys=True) + "\n")
        for r in records:
            f.write(json.dumps({"type": "pair", **r}, sort_keys=True) + "\n")
        f.write(json.dumps(summary, sort_keys=True) + "\n")
    with open(os.path.join(output_dir, "timings.jsonl"), "w") as f:
        for line in timing_lines:
            f.write(json.dumps(line, sort_keys=True) + "\n")

    return aggregate, records, processed == len(records)
