"""Top-scanline SGM ("Fast R3SGM") and its consistency machinery.

Aggregation only looks at the row above each pixel (up-left, up, up-right),
so every row depends on the previous one and nothing to the left. A reverse
pass is obtained by rotating both inputs by 180 degrees and swapping the
reference image.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .config import INT32_MAX, PipelineConfig
from .core import INVALID, DisparityMap, as_gray, rotate180
from .cost import stereo_cost_volume

# x offsets of the predecessor pixel on the previous row
DIRECTIONS = (-1, 0, 1)


def _accum_dtype(costs: np.ndarray, p2: int):
    peak = int(costs.max(initial=0))
    return np.int32 if 3 * (peak + p2) <= INT32_MAX else np.int64


def aggregate(costs: np.ndarray, p1: int, p2: int) -> np.ndarray:
    """Sum of the three top-scanline SGM path costs.

    ``costs`` is an ``(H, W, D)`` integer volume. For each direction the
    classic recurrence ``L(p,d) = C(p,d) + min(L(q,d), L(q,d+-1) + P1,
    min_k L(q,k) + P2) - min_k L(q,k)`` is applied with ``q`` the predecessor
    on row ``y-1``; pixels without a predecessor take ``L = C``.
    """
    if not (p2 >= p1 > 0):
        raise ValueError(f"need p2 >= p1 > 0, got p1={p1} p2={p2}")
    costs = np.asarray(costs)
    if costs.ndim != 3:
        raise ValueError(f"cost volume must be 3-D, got shape {costs.shape}")
    h, w, nd = costs.shape
    dtype = _accum_dtype(costs, p2)
    big = np.iinfo(dtype).max // 4
    p1 = dtype(p1)
    p2 = dtype(p2)

    out = np.empty((h, w, nd), dtype=dtype)
    row = costs[0].astype(dtype)
    out[0] = 3 * row
    prev = np.broadcast_to(row, (3, w, nd)).copy()

    # predecessor buffer, padded by one column on each side and one disparity
    # on each side so the +-1 neighbours fall on `big`
    shifted = np.full((3, w, nd + 2), big, dtype=dtype)
    has_pred = np.ones((3, w, 1), dtype=bool)
    if w > 0:
        has_pred[0, 0] = False
        has_pred[2, w - 1] = False

    for y in range(1, h):
        row = costs[y].astype(dtype)
        # direction index i reads prev[i] at column x + DIRECTIONS[i]
        shifted[0, 1:, 1:-1] = prev[0, :-1]
        shifted[0, 0, 1:-1] = 0
        shifted[1, :, 1:-1] = prev[1]
        shifted[2, :-1, 1:-1] = prev[2, 1:]
        shifted[2, w - 1, 1:-1] = 0

        centre = shifted[:, :, 1:-1]
        mins = centre.min(axis=2, keepdims=True)
        best = np.minimum(centre, shifted[:, :, :-2] + p1)
        np.minimum(best, shifted[:, :, 2:] + p1, out=best)
        np.minimum(best, mins + p2, out=best)
        best -= mins
        cur = row[None] + best
        # pixels whose predecessor is outside the image start a new path
        cur = np.where(has_pred, cur, row[None])
        out[y] = cur.sum(axis=0)
        prev = cur
    return out


def wta(agg: np.ndarray) -> DisparityMap:
    """Winner-take-all; ties go to the smallest disparity."""
    agg = np.asarray(agg)
    return DisparityMap(np.argmin(agg, axis=2).astype(np.float64), agg.shape[2] - 1)


def secondary_disparity(agg: np.ndarray) -> DisparityMap:
    """Match-image disparities reprojected from the reference volume.

    ``value(x, y) = argmin_d agg(y, x + d, d)`` over ``x + d < W``.
    """
    agg = np.asarray(agg)
    h, w, nd = agg.shape
    fill = np.iinfo(agg.dtype).max if np.issubdtype(agg.dtype, np.integer) else np.inf
    shifted = np.full((h, w, nd), fill, dtype=agg.dtype)
    for d in range(min(nd, w)):
        shifted[:, : w - d, d] = agg[:, d:, d]
    # d = 0 is always in range, so every pixel gets a value
    return DisparityMap(np.argmin(shifted, axis=2).astype(np.float64), nd - 1)


def lr_check(reference: DisparityMap, other: DisparityMap, tau: float = 1.0) -> DisparityMap:
    """Keep ``d = reference(x, y)`` only if ``other(x - d, y)`` exists and is within ``tau``."""
    if reference.height != other.height:
        raise ValueError("left-right check needs maps of equal height")
    ref = reference.values
    oth = other.values
    h, w = ref.shape
    valid = reference.valid
    xs = np.arange(w)[None, :] - np.rint(np.where(valid, ref, 0)).astype(np.int64)
    inside = valid & (xs >= 0) & (xs < other.width)
    ys = np.broadcast_to(np.arange(h)[:, None], (h, w))
    partner = np.full((h, w), INVALID)
    partner[inside] = oth[ys[inside], xs[inside]]
    keep = inside & (partner != INVALID) & (np.abs(ref - partner) <= tau)
    return reference.with_values(np.where(keep, ref, INVALID))


def median_filter(d: DisparityMap, window: int = 3, min_valid: int = 5) -> DisparityMap:
    """Median of the valid values in each window, INVALID below the quorum.

    Even counts take the lower of the two middle values. Windows are clipped
    at the image border (out-of-bounds pixels count as invalid).
    """
    if window < 1 or window % 2 == 0:
        raise ValueError(f"median window must be odd, got {window}")
    r = window // 2
    vals = np.where(d.valid, d.values, np.nan)
    padded = np.pad(vals, r, mode="constant", constant_values=np.nan)
    win = sliding_window_view(padded, (window, window)).reshape(d.height, d.width, -1)
    count = np.count_nonzero(~np.isnan(win), axis=2)
    ordered = np.sort(win, axis=2)  # NaN sorts last
    idx = np.maximum(count - 1, 0) // 2
    med = np.take_along_axis(ordered, idx[..., None], axis=2)[..., 0]
    return d.with_values(np.where(count >= min_valid, med, INVALID))


def unchecked_pass(reference, match, cfg: PipelineConfig) -> DisparityMap:
    """Raster pass without any left-right invalidation: WTA then median."""
    costs = stereo_cost_volume(reference, match, cfg.disparity_range, cfg.census_window)
    agg = aggregate(costs, cfg.p1, cfg.p2)
    return median_filter(wta(agg), cfg.median_window, cfg.min_valid)


def fast_r3sgm_pass(reference, match, cfg: PipelineConfig) -> DisparityMap:
    """One raster-order pass: cost, aggregation, internal LR check, median."""
    reference = as_gray(reference)
    match = as_gray(match)
    if reference.shape != match.shape:
        raise ValueError(f"stereo images differ in shape: {reference.shape} vs {match.shape}")
    cfg.check_dimensions(*reference.shape)
    costs = stereo_cost_volume(reference, match, cfg.disparity_range, cfg.census_window)
    agg = aggregate(costs, cfg.p1, cfg.p2)
    primary = wta(agg)
    checked = lr_check(primary, secondary_disparity(agg), cfg.lr_threshold)
    return median_filter(checked, cfg.median_window, cfg.min_valid)


def dual_pass(left, right, cfg: PipelineConfig) -> tuple[DisparityMap, DisparityMap]:
    """Raster pass on (left, right) and reverse pass on the rotated (right, left).

    The second map is the right-image disparity map, still rotated by 180 degrees.
    """
    forward = fast_r3sgm_pass(left, right, cfg)
    backward = fast_r3sgm_pass(rotate180(as_gray(right)), rotate180(as_gray(left)), cfg)
    return forward, backward


def consolidate(left_map: DisparityMap, right_map_rotated: DisparityMap,
                tau: float = 1.0) -> DisparityMap:
    """Undo the rotation of the reverse-pass map and check it against the left map."""
    return lr_check(left_map, rotate180(right_map_rotated), tau)
