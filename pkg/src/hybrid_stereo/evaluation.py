"""KITTI-style scoring: background-preferring gap filling and the D1 error."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import INVALID, DisparityMap

ABS_THRESHOLD = 3.0
REL_THRESHOLD = 0.05


def _fill_row(row: np.ndarray, valid: np.ndarray) -> np.ndarray:
    idx = np.arange(len(row))
    prev_i = np.maximum.accumulate(np.where(valid, idx, -1))
    next_i = np.minimum.accumulate(np.where(valid, idx, len(row))[::-1])[::-1]
    has_prev = prev_i >= 0
    has_next = next_i < len(row)
    pv = row[np.clip(prev_i, 0, len(row) - 1)]
    nv = row[np.clip(next_i, 0, len(row) - 1)]
    out = np.where(has_prev & has_next, np.minimum(pv, nv), np.where(has_prev, pv, nv))
    return np.where(valid, row, out)


def interpolate_gaps(d: DisparityMap) -> DisparityMap:
    """Fill every INVALID pixel.

    Runs inside a row take the smaller of the two bounding disparities; runs
    touching the row ends copy their single neighbour. Rows with no valid
    pixel copy the nearest filled row above, else the nearest below.
    """
    valid = d.valid
    if not valid.any():
        raise ValueError("cannot interpolate a map with no valid pixels")
    vals = d.values.copy()
    rows_ok = valid.any(axis=1)
    for y in np.flatnonzero(rows_ok):
        vals[y] = _fill_row(vals[y], valid[y])
    filled = np.flatnonzero(rows_ok)
    for y in np.flatnonzero(~rows_ok):
        above = filled[filled < y]
        src = above[-1] if len(above) else filled[filled > y][0]
        vals[y] = vals[src]
    return d.with_values(vals)


@dataclass
class EvalResult:
    d1_all: float
    d1_bg: Optional[float] = None
    d1_fg: Optional[float] = None
    density: float = 1.0
    n_gt: int = 0
    n_bg: int = 0
    n_fg: int = 0
    timings: dict = field(default_factory=dict)

    def as_dict(self, with_timings: bool = False) -> dict:
        out = {
            "d1_all": self.d1_all,
            "d1_bg": self.d1_bg,
            "d1_fg": self.d1_fg,
            "density": self.density,
            "n_gt": self.n_gt,
        }
        if with_timings:
            out["timings"] = self.timings
        return out


def d1_errors(est: np.ndarray, gt: np.ndarray) -> np.ndarray:
    """Erroneous when off by at least 3 px and at least 5% of the true disparity."""
    err = np.abs(est - gt)
    return (err >= ABS_THRESHOLD) & (err >= REL_THRESHOLD * np.abs(gt))


def evaluate(est: DisparityMap, gt: DisparityMap, fg_mask: Optional[np.ndarray] = None,
             density: Optional[float] = None) -> EvalResult:
    """Score ``est`` against ``gt`` over the ground-truth-valid pixels.

    ``est`` should already be densified with :func:`interpolate_gaps`; any
    remaining INVALID estimate counts as an error. ``density`` is the
    pre-interpolation density to report; it defaults to ``est.density``.
    """
    if est.shape != gt.shape:
        raise ValueError(f"shape mismatch: estimate {est.shape} vs ground truth {gt.shape}")
    gvalid = gt.valid
    wrong = d1_errors(est.values, gt.values) | ~est.valid
    n = int(gvalid.sum())
    d1_all = float(wrong[gvalid].sum() / n) if n else 0.0
    res = EvalResult(d1_all, density=est.density if density is None else density, n_gt=n)
    if fg_mask is not None:
        fg_mask = np.asarray(fg_mask, dtype=bool)
        if fg_mask.shape != gt.shape:
            raise ValueError("foreground mask shape does not match the ground truth")
        fg = gvalid & fg_mask
        bg = gvalid & ~fg_mask
        res.n_fg, res.n_bg = int(fg.sum()), int(bg.sum())
        res.d1_fg = float(wrong[fg].sum() / res.n_fg) if res.n_fg else 0.0
        res.d1_bg = float(wrong[bg].sum() / res.n_bg) if res.n_bg else 0.0
    return res


def mean_results(results: list) -> EvalResult:
    """Per-pair averages, as the benchmark tables report them."""
    if not results:
        raise ValueError("no results to aggregate")

    def avg(values):
        values = [v for v in values if v is not None]
        return float(np.mean(values)) if values else None

    return EvalResult(
        d1_all=avg(r.d1_all for r in results),
        d1_bg=avg(r.d1_bg for r in results),
        d1_fg=avg(r.d1_fg for r in results),
        density=avg(r.density for r in results),
        n_gt=sum(r.n_gt for r in results),
        n_bg=sum(r.n_bg for r in results),
        n_fg=sum(r.n_fg for r in results),
    )


__all__ = [
    "INVALID",
    "EvalResult",
    "d1_errors",
    "evaluate",
    "interpolate_gaps",
    "mean_results",
]
