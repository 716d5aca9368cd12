"""Synthetic rectified stereo pairs with exact ground truth.

Used by the tests and by ``hybrid-stereo make-fixtures`` to produce a small
KITTI-layout dataset when the real benchmark is not available.
"""

from __future__ import annotations

import os

import numpy as np

from .core import INVALID, DisparityMap, save_gray_image, save_kitti_disparity


def _texture(rng, h, w, smooth):
    img = rng.random((h, w))
    if smooth > 0:
        # separable box blur, repeated, approximates a Gaussian low-pass
        k = 2 * smooth + 1
        kern = np.ones(k) / k
        for _ in range(2):
            img = np.apply_along_axis(lambda r: np.convolve(r, kern, mode="same"), 1, img)
            img = np.apply_along_axis(lambda c: np.convolve(c, kern, mode="same"), 0, img)
    lo, hi = np.percentile(img, [1, 99])
    img = (img - lo) / max(hi - lo, 1e-12)
    return np.clip(img * 255, 0, 255)


def shifted_pair(width: int, height: int, shift: int, seed: int = 0):
    """Random-texture pair whose true disparity is ``shift`` everywhere.

    ``right[:, x] == left[:, x + shift]``, so left pixel ``x`` matches right
    pixel ``x - shift``.
    """
    rng = np.random.default_rng(seed)
    tex = rng.integers(0, 256, (height, width + shift), dtype=np.uint8)
    return tex[:, :width].copy(), tex[:, shift:shift + width].copy()


def layered_scene(width: int = 320, height: int = 120, seed: int = 0,
                  noise: float = 2.0, smooth: int = 1):
    """Slanted ground plane plus a fronto-parallel box in front of it.

    Returns ``(left, right, gt, fg_mask)``; ``gt`` is the integer left-image
    disparity and ``fg_mask`` marks the box.
    """
    rng = np.random.default_rng(seed)
    ys = np.arange(height)[:, None]
    xs = np.arange(width)[None, :]
    gt = np.broadcast_to(4 + (ys * 24) // max(height, 1), (height, width)).astype(np.int64)
    gt = gt + (xs * 3) // max(width, 1)
    fg = np.zeros((height, width), dtype=bool)
    bx0, bx1 = width // 3, width // 3 + width // 4
    by0, by1 = height // 4, height // 4 + height // 3
    fg[by0:by1, bx0:bx1] = True
    gt = np.where(fg, 36, gt)

    left = _texture(rng, height, width, smooth)
    right = _texture(rng, height, width, smooth)  # fills disoccluded pixels
    depth = np.full((height, width), -1)
    for y in range(height):
        for x in range(width):
            d = gt[y, x]
            xr = x - d
            if 0 <= xr < width and d > depth[y, xr]:
                depth[y, xr] = d
                right[y, xr] = left[y, x]
    left = left + rng.normal(0, noise, left.shape)
    right = right + rng.normal(0, noise, right.shape)
    left = np.clip(np.rint(left), 0, 255).astype(np.uint8)
    right = np.clip(np.rint(right), 0, 255).astype(np.uint8)
    return left, right, gt, fg


def write_fixture_dataset(root: str, count: int = 3, width: int = 320, height: int = 120,
                          seed: int = 0, with_gt: bool = True) -> list[str]:
    """Write ``count`` layered scenes in the KITTI 2015 training layout."""
    names = []
    for sub in ("image_2", "image_3") + (("disp_occ_0", "obj_map") if with_gt else ()):
        os.makedirs(os.path.join(root, sub), exist_ok=True)
    for i in range(count):
        name = f"{i:06d}_10.png"
        left, right, gt, fg = layered_scene(width, height, seed=seed + i)
        save_gray_image(left, os.path.join(root, "image_2", name))
        save_gray_image(right, os.path.join(root, "image_3", name))
        if with_gt:
            gt_map = DisparityMap(np.where(gt > 0, gt, INVALID).astype(np.float64), 255)
            save_kitti_disparity(gt_map, os.path.join(root, "disp_occ_0", name))
            save_gray_image(fg.astype(np.uint8) * 255, os.path.join(root, "obj_map", name))
        names.append(name)
    return names
