"""ELAS-style priors: support points, anchors, plane priors and grid vectors."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .core import INVALID, DisparityMap
from .delaunay import EPS, DegenerateInputError, triangulate


def _shift(values: np.ndarray, dy: int, dx: int, fill) -> np.ndarray:
    """``out[y, x] = values[y + dy, x + dx]``, ``fill`` where that is out of bounds."""
    h, w = values.shape
    out = np.full_like(values, fill)
    if abs(dy) >= h or abs(dx) >= w:
        return out
    ys = slice(max(0, -dy), min(h, h - dy))
    xs = slice(max(0, -dx), min(w, w - dx))
    yt = slice(max(0, dy), min(h, h + dy))
    xt = slice(max(0, dx), min(w, w + dx))
    out[ys, xs] = values[yt, xt]
    return out


def support_check(d: DisparityMap, window: int = 5, min_count: int = 10,
                  max_diff: float = 5.0) -> DisparityMap:
    """Keep a pixel when at least ``min_count`` window neighbours differ by less than ``max_diff``.

    The center is excluded and the window is clipped at the border; the
    threshold is not prorated there.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError(f"support window must be odd, got {window}")
    r = window // 2
    vals = d.values
    valid = d.valid
    count = np.zeros(d.shape, dtype=np.int32)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            if dy == 0 and dx == 0:
                continue
            nb = _shift(vals, dy, dx, INVALID)
            count += (nb != INVALID) & (np.abs(nb - vals) < max_diff)
    keep = valid & (count >= min_count)
    return d.with_values(np.where(keep, vals, INVALID))


@dataclass(frozen=True)
class AnchorSet:
    """Anchor pixels in raster order; ``xy`` holds integer (x, y) pairs."""

    xy: np.ndarray
    disparities: np.ndarray

    def __len__(self):
        return len(self.disparities)

    @classmethod
    def from_mask(cls, d: DisparityMap, mask: np.ndarray) -> "AnchorSet":
        ys, xs = np.nonzero(mask)  # row-major, i.e. raster order
        return cls(np.stack([xs, ys], axis=1).astype(np.int64), d.values[ys, xs].copy())

    def as_triples(self) -> list[tuple[int, int, float]]:
        return [(int(x), int(y), float(v)) for (x, y), v in zip(self.xy, self.disparities)]


def redundancy_offsets(k: int) -> list[tuple[int, int]]:
    """(dx, dy) offsets of the window above and behind a pixel."""
    above = [(dx, dy) for dy in range(-2 * k, 0) for dx in range(-k, k + 1)]
    behind = [(-dx, 0) for dx in range(1, k + 1)]
    return above + behind


def redundancy_check(s: DisparityMap, k: int = 5, tolerance: float = 1.0,
                     against: str = "support") -> AnchorSet:
    """Sparsify support points into anchors.

    A pixel is dropped when a pixel in its window (2k rows above within +-k
    columns, plus k pixels to the left) holds a disparity within
    ``tolerance``. With ``against="support"`` the window is read from the
    support image itself; with ``against="anchors"`` it is read from the
    anchors retained so far in the raster scan.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    vals = s.values
    valid = s.valid
    offsets = redundancy_offsets(k)
    if against == "support":
        seen = np.zeros(s.shape, dtype=bool)
        for dx, dy in offsets:
            nb = _shift(vals, dy, dx, INVALID)
            seen |= (nb != INVALID) & (np.abs(nb - vals) <= tolerance)
        return AnchorSet.from_mask(s, valid & ~seen)
    if against != "anchors":
        raise ValueError(f"against must be 'support' or 'anchors', got {against!r}")

    h, w = s.shape
    kept = np.full((h, w), INVALID)
    above = [(dx, dy) for dx, dy in offsets if dy < 0]
    for y in range(h):
        row = vals[y]
        cand = valid[y].copy()
        for dx, dy in above:
            if y + dy < 0:
                continue
            nb = _shift(kept[y + dy][None, :], 0, dx, INVALID)[0]
            cand &= ~((nb != INVALID) & (np.abs(nb - row) <= tolerance))
        for x in np.flatnonzero(cand):
            left = kept[y, max(0, x - k):x]
            if np.any((left != INVALID) & (np.abs(left - row[x]) <= tolerance)):
                continue
            kept[y, x] = row[x]
    return AnchorSet.from_mask(s, kept != INVALID)


@dataclass(frozen=True)
class Triangulation:
    anchors: AnchorSet
    triangles: np.ndarray  # (M, 3) CCW vertex indices

    @property
    def degenerate(self) -> bool:
        return len(self.triangles) == 0


def delaunay(anchors: AnchorSet) -> Triangulation:
    """Delaunay triangulation of the anchor positions.

    Fewer than three anchors or collinear anchors give an empty,
    ``degenerate`` triangulation rather than an exception.
    """
    try:
        tris = triangulate(anchors.xy)
    except DegenerateInputError:
        tris = np.zeros((0, 3), dtype=np.int64)
    return Triangulation(anchors, tris)


def interpolate_priors(t: Triangulation, width: int, height: int,
                       dmax: float = math.inf) -> DisparityMap:
    """Rasterize the triangulation, interpolating vertex disparities barycentrically.

    Pixel centers sit on integer coordinates. Pixels outside every triangle
    stay INVALID; anchor pixels get their disparity exactly.
    """
    prior = np.full((height, width), INVALID)
    pts = t.anchors.xy.astype(np.float64)
    disp = t.anchors.disparities.astype(np.float64)
    for ia, ib, ic in t.triangles:
        (ax, ay), (bx, by), (cx, cy) = pts[ia], pts[ib], pts[ic]
        area = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if area <= 0:
            continue
        x0 = max(0, int(math.ceil(min(ax, bx, cx))))
        x1 = min(width - 1, int(math.floor(max(ax, bx, cx))))
        y0 = max(0, int(math.ceil(min(ay, by, cy))))
        y1 = min(height - 1, int(math.floor(max(ay, by, cy))))
        if x0 > x1 or y0 > y1:
            continue
        gy, gx = np.mgrid[y0:y1 + 1, x0:x1 + 1].astype(np.float64)
        wa = (cx - bx) * (gy - by) - (cy - by) * (gx - bx)
        wb = (ax - cx) * (gy - cy) - (ay - cy) * (gx - cx)
        wc = (bx - ax) * (gy - ay) - (by - ay) * (gx - ax)
        inside = (wa >= -EPS) & (wb >= -EPS) & (wc >= -EPS)
        value = (wa * disp[ia] + wb * disp[ib] + wc * disp[ic]) / area
        block = prior[y0:y1 + 1, x0:x1 + 1]
        block[inside] = value[inside]
    xy = t.anchors.xy
    if len(xy):
        inb = (xy[:, 0] >= 0) & (xy[:, 0] < width) & (xy[:, 1] >= 0) & (xy[:, 1] < height)
        prior[xy[inb, 1], xy[inb, 0]] = disp[inb]
    if not math.isfinite(dmax):
        dmax = float(max(disp.max(initial=0.0), 0.0))
    return DisparityMap(prior, dmax)


@dataclass(frozen=True)
class GridVectorField:
    cell: int
    masks: np.ndarray  # (rows, cols, D) bool

    @property
    def num_disp(self) -> int:
        return self.masks.shape[2]

    def per_pixel(self, height: int, width: int) -> np.ndarray:
        """Expand to an ``(H, W, D)`` mask."""
        rows = np.arange(height) // self.cell
        cols = np.arange(width) // self.cell
        return self.masks[rows[:, None], cols[None, :]]


def grid_vectors(s: DisparityMap, cell: int = 50, num_disp: int = 128) -> GridVectorField:
    """Per-cell masks of the support disparities dilated by +-1.

    Cells without any support point allow every disparity.
    """
    if cell < 1:
        raise ValueError("cell must be >= 1")
    h, w = s.shape
    rows = -(-h // cell)
    cols = -(-w // cell)
    masks = np.zeros((rows, cols, num_disp), dtype=bool)
    ys, xs = np.nonzero(s.valid)
    d = np.rint(s.values[ys, xs]).astype(np.int64)
    cy, cx = ys // cell, xs // cell
    for off in (-1, 0, 1):
        dd = d + off
        ok = (dd >= 0) & (dd < num_disp)
        masks[cy[ok], cx[ok], dd[ok]] = True
    empty = ~masks.any(axis=2)
    masks[empty] = True
    return GridVectorField(cell, masks)


def write_anchors(anchors: AnchorSet, path) -> None:
    """Plain-text dump, one ``x y d`` line per anchor."""
    with open(os.fspath(path), "w") as f:
        for x, y, d in anchors.as_triples():
            f.write(f"{x} {y} {d:g}\n")


def write_off(t: Triangulation, path) -> None:
    """OFF-style dump: vertices as ``x y d`` then ``3 i j k`` faces."""
    with open(os.fspath(path), "w") as f:
        f.write("OFF\n")
        f.write(f"{len(t.anchors)} {len(t.triangles)} 0\n")
        for x, y, d in t.anchors.as_triples():
            f.write(f"{x} {y} {d:g}\n")
        for a, b, c in t.triangles:
            f.write(f"3 {a} {b} {c}\n")
