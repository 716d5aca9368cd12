"""Prior-guided final pass: rewrite the cost volume, aggregate, WTA, median."""

from __future__ import annotations

import math

import numpy as np

from .config import PipelineConfig
from .core import DisparityMap, as_gray
from .cost import stereo_cost_volume
from .priors import GridVectorField
from .sgm import aggregate, median_filter, wta


def modify_costs(raw: np.ndarray, support: DisparityMap, prior: DisparityMap,
                 grid: GridVectorField, cfg: PipelineConfig) -> np.ndarray:
    """Apply the support, grid and plane-prior rules to a raw cost volume.

    Precedence per pixel: a support point's vector becomes 0 at its own
    disparity and ``M`` elsewhere, and nothing else touches it. Other pixels
    get ``M`` on disparities missing from their cell's grid vector, then a
    negative Gaussian (rounded to whole cost units, floored at 0) on the
    allowed disparities within ``gauss_radius`` of a valid prior.
    """
    raw = np.asarray(raw)
    h, w, nd = raw.shape
    if support.shape != (h, w) or prior.shape != (h, w):
        raise ValueError("support and prior maps must match the cost volume")
    if grid.num_disp != nd:
        raise ValueError("grid vectors and cost volume disagree on the disparity range")
    big = cfg.masking_cost(h)

    allowed = grid.per_pixel(h, w)
    cost = np.where(allowed, raw.astype(np.int32), np.int32(big))

    pvals = prior.values
    pvalid = prior.valid
    amp = cfg.amplitude
    radius = cfg.gauss_radius
    two_sigma2 = 2.0 * cfg.gauss_sigma**2
    if amp > 0 and pvalid.any():
        ys, xs = np.nonzero(pvalid)
        centre = pvals[ys, xs]
        first = np.ceil(centre - radius).astype(np.int64)
        for j in range(2 * radius + 2):
            d = first + j
            ok = (d <= centre + radius) & (d >= 0) & (d < nd)
            yy, xx, dd, cc = ys[ok], xs[ok], d[ok], centre[ok]
            ok = allowed[yy, xx, dd]
            yy, xx, dd, cc = yy[ok], xx[ok], dd[ok], cc[ok]
            drop = np.rint(amp * np.exp(-((dd - cc) ** 2) / two_sigma2)).astype(np.int32)
            cost[yy, xx, dd] = np.maximum(cost[yy, xx, dd] - drop, 0)

    sy, sx = np.nonzero(support.valid)
    if len(sy):
        sd = np.rint(support.values[sy, sx]).astype(np.int64)
        if sd.max() >= nd:
            raise ValueError("support disparity outside the cost volume")
        cost[sy, sx, :] = big
        cost[sy, sx, sd] = 0
    return cost


def combined_optimize(left, right, support: DisparityMap, prior: DisparityMap,
                      grid: GridVectorField, cfg: PipelineConfig) -> DisparityMap:
    """Dense prior-guided disparity map for the left image.

    No left-right check is applied; only the median quorum can leave pixels
    INVALID. Support disparities are copied into the WTA result before the
    median.
    """
    left = as_gray(left)
    right = as_gray(right)
    if left.shape != right.shape:
        raise ValueError(f"stereo images differ in shape: {left.shape} vs {right.shape}")
    cfg.check_dimensions(*left.shape)
    raw = stereo_cost_volume(left, right, cfg.disparity_range, cfg.census_window)
    cost = modify_costs(raw, support, prior, grid, cfg)
    disp = wta(aggregate(cost, cfg.p1, cfg.p2))
    vals = np.where(support.valid, support.values, disp.values)
    return median_filter(disp.with_values(vals), cfg.median_window, cfg.min_valid)


def neutral_priors(height: int, width: int, cfg: PipelineConfig):
    """Support, prior and grid inputs that leave the cost volume untouched."""
    dmax = cfg.disparity_range - 1
    empty = DisparityMap.invalid(height, width, dmax)
    rows = math.ceil(height / cfg.grid_cell)
    cols = math.ceil(width / cfg.grid_cell)
    full = np.ones((rows, cols, cfg.disparity_range), dtype=bool)
    return empty, empty, GridVectorField(cfg.grid_cell, full)
