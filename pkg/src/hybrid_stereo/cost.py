"""Census transform and Hamming-distance cost volumes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_gray


@dataclass(frozen=True)
class CensusImage:
    """Per-pixel census descriptors.

    Neighbor ``i`` of the window (row-major, center skipped) is stored at bit
    ``nbits - 1 - i``, so printing a descriptor MSB-first lists the neighbors
    in window order.
    """

    bits: np.ndarray
    window: int

    @property
    def nbits(self) -> int:
        return self.window**2 - 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape


def census_transform(img, window: int = 5) -> CensusImage:
    """Set a bit for every window neighbor strictly darker than the center.

    Neighbors outside the image read as intensity 0.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError(f"census window must be odd and >= 3, got {window}")
    nbits = window**2 - 1
    if nbits > 64:
        raise ValueError(f"census window {window} needs {nbits} bits; at most 64 supported")
    img = as_gray(img)
    h, w = img.shape
    r = window // 2
    padded = np.pad(img, r, mode="constant", constant_values=0)
    out = np.zeros((h, w), dtype=np.uint64)
    bit = nbits - 1
    for dy in range(window):
        for dx in range(window):
            if dy == r and dx == r:
                continue
            neighbor = padded[dy:dy + h, dx:dx + w]
            out |= (neighbor < img).astype(np.uint64) << np.uint64(bit)
            bit -= 1
    return CensusImage(out, window)


def hamming(a, b) -> np.ndarray:
    return np.bitwise_count(np.bitwise_xor(a, b))


def build_cost_volume(ref: CensusImage, match: CensusImage, num_disp: int) -> np.ndarray:
    """Hamming cost volume of shape ``(H, W, num_disp)``.

    ``cost[y, x, d]`` compares ``ref[y, x]`` with ``match[y, x - d]``; where
    ``x - d < 0`` the cost is the descriptor length.
    """
    if ref.shape != match.shape:
        raise ValueError(f"census images differ in shape: {ref.shape} vs {match.shape}")
    if ref.window != match.window:
        raise ValueError("census images use different windows")
    if num_disp < 2:
        raise ValueError("disparity range must be >= 2")
    h, w = ref.shape
    max_cost = ref.nbits
    cost = np.full((h, w, num_disp), max_cost, dtype=np.uint8)
    for d in range(min(num_disp, w)):
        cost[:, d:, d] = hamming(ref.bits[:, d:], match.bits[:, :w - d])
    return cost


def stereo_cost_volume(reference, match, num_disp: int, window: int = 5) -> np.ndarray:
    """Census both images and build their cost volume."""
    reference = as_gray(reference)
    match = as_gray(match)
    if reference.shape != match.shape:
        raise ValueError(f"stereo images differ in shape: {reference.shape} vs {match.shape}")
    return build_cost_volume(
        census_transform(reference, window), census_transform(match, window), num_disp
    )
