"""Image containers, the INVALID disparity sentinel, and file I/O.

Gray images are plain ``uint8`` arrays of shape ``(height, width)``.
Disparity maps carry their disparity bound alongside the values so every
stage can check the ``0 <= d <= dmax`` invariant.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Union

import numpy as np
from PIL import Image

# 0 is a legal disparity, so invalid pixels need a value outside [0, dmax].
INVALID = -1.0

KITTI_SCALE = 256.0


class ImageFormatError(ValueError):
    """Base class for image decoding problems."""


class MalformedImageError(ImageFormatError):
    """Header or payload does not match the declared format."""


class UnsupportedDepthError(ImageFormatError):
    """The file uses a bit depth this reader does not handle."""


class DisparityOverflowError(ValueError):
    """A disparity does not fit the 16-bit KITTI encoding."""


def as_gray(img) -> np.ndarray:
    """Validate and return ``img`` as a 2-D ``uint8`` array."""
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"gray image must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("gray image must be at least 1x1")
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("gray image values must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


@dataclass(frozen=True)
class DisparityMap:
    values: np.ndarray
    dmax: float

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.ndim != 2 or vals.shape[0] < 1 or vals.shape[1] < 1:
            raise ValueError(f"disparity map must be a non-empty 2-D array, got {vals.shape}")
        ok = vals == INVALID
        bad = ~ok & ~((vals >= 0) & (vals <= self.dmax))
        if bad.any():
            raise ValueError(
                f"{int(bad.sum())} disparities outside [0, {self.dmax}] and not INVALID"
            )
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def invalid(cls, height: int, width: int, dmax: float) -> "DisparityMap":
        return cls(np.full((height, width), INVALID), dmax)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def valid(self) -> np.ndarray:
        return self.values != INVALID

    @property
    def density(self) -> float:
        return float(self.valid.mean())

    def with_values(self, values: np.ndarray) -> "DisparityMap":
        return DisparityMap(values, self.dmax)

    def __eq__(self, other):
        if not isinstance(other, DisparityMap):
            return NotImplemented
        return self.dmax == other.dmax and np.array_equal(self.values, other.values)

    __hash__ = None


ImageLike = Union[np.ndarray, DisparityMap]


def rotate180(img: ImageLike) -> ImageLike:
    """Rotate by 180 degrees: ``out[y, x] == in[H-1-y, W-1-x]``."""
    if isinstance(img, DisparityMap):
        return img.with_values(img.values[::-1, ::-1])
    return np.ascontiguousarray(np.asarray(img)[::-1, ::-1])


# --------------------------------------------------------------------- I/O

def _read_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    if not data.startswith(b"P5"):
        raise MalformedImageError(f"{path}: not a binary PGM (P5) file")

    # header: magic, width, height, maxval; '#' comments allowed between tokens
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise MalformedImageError(f"{path}: truncated PGM header")
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tok = data[start:pos]
        if not tok.isdigit():
            raise MalformedImageError(f"{path}: bad PGM header token {tok!r}")
        tokens.append(int(tok))
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise MalformedImageError(f"{path}: truncated PGM header")
    pos += 1  # single whitespace byte before the raster

    width, height, maxval = tokens
    if width < 1 or height < 1:
        raise MalformedImageError(f"{path}: PGM dimensions must be positive")
    if maxval > 255:
        raise UnsupportedDepthError(f"{path}: PGM maxval {maxval} implies 16-bit samples")
    if maxval < 1:
        raise MalformedImageError(f"{path}: PGM maxval must be positive")
    payload = data[pos:pos + width * height]
    if len(payload) < width * height:
        raise MalformedImageError(
            f"{path}: PGM payload has {len(payload)} bytes, expected {width * height}"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()


def load_gray_image(path: str) -> np.ndarray:
    """Load an 8-bit binary PGM or a PNG as a ``uint8`` gray image.

    Color PNGs are converted with PIL's ITU-R 601-2 luma transform.
    16-bit inputs raise :class:`UnsupportedDepthError`.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    with open(path, "rb") as f:
        magic = f.read(2)
    if magic == b"P5":
        return _read_pgm(path)
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("I;16", "I;16B", "I;16L", "I", "F"):
                raise UnsupportedDepthError(f"{path}: {mode} images are not 8-bit")
            if mode == "L":
                arr = np.array(im, dtype=np.uint8)
            else:
                arr = np.array(im.convert("L"), dtype=np.uint8)
    except UnsupportedDepthError:
        raise
    except (OSError, SyntaxError) as exc:
        raise MalformedImageError(f"{path}: {exc}") from exc
    return arr


def save_gray_image(img: np.ndarray, path: str) -> None:
    img = as_gray(img)
    path = os.fspath(path)
    if path.lower().endswith(".pgm"):
        h, w = img.shape
        with open(path, "wb") as f:
            f.write(b"P5\n%d %d\n255\n" % (w, h))
            f.write(img.tobytes())
    else:
        Image.fromarray(img, mode="L").save(path)


def _read_uint16_png(path: str) -> np.ndarray:
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode not in ("I;16", "I;16B", "I;16L", "I"):
                raise UnsupportedDepthError(f"{path}: expected 16-bit PNG, got mode {im.mode}")
            arr = np.array(im)
    except UnsupportedDepthError:
        raise
    except (OSError, SyntaxError) as exc:
        raise MalformedImageError(f"{path}: {exc}") from exc
    if arr.ndim != 2:
        raise UnsupportedDepthError(f"{path}: expected a single-channel image")
    return arr.astype(np.int64)


def load_kitti_disparity(path: str, dmax: float | None = None) -> DisparityMap:
    """Decode a KITTI 16-bit disparity PNG (stored ``s`` -> ``s / 256``, 0 invalid)."""
    raw = _read_uint16_png(path)
    if raw.min() < 0 or raw.max() > 65535:
        raise UnsupportedDepthError(f"{path}: values exceed the 16-bit range")
    values = np.where(raw == 0, INVALID, raw / KITTI_SCALE)
    if dmax is None:
        dmax = 65535 / KITTI_SCALE
    return DisparityMap(values, dmax)


def encode_kitti(d: DisparityMap) -> np.ndarray:
    vals = d.values
    valid = d.valid
    if not np.isfinite(vals).all():
        raise ValueError("disparity map contains non-finite values")
    scaled = np.rint(np.where(valid, vals, 0.0) * KITTI_SCALE)
    if scaled.max(initial=0) > 65535:
        worst = float(vals[valid].max())
        raise DisparityOverflowError(
            f"disparity {worst} scales to {worst * KITTI_SCALE:.0f} > 65535"
        )
    # stored 0 means INVALID, so a valid zero disparity is written as 1/256
    scaled[valid & (scaled == 0)] = 1
    return scaled.astype(np.uint16)


def save_kitti_disparity(d: DisparityMap, path: str) -> None:
    """Write ``d`` as a KITTI 16-bit PNG; INVALID is stored as 0."""
    out = encode_kitti(d)
    Image.fromarray(out).save(os.fspath(path), format="PNG")


def load_mask(path: str) -> np.ndarray:
    """Load a KITTI object map (or any 8/16-bit PNG) as a boolean foreground mask."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    with Image.open(path) as im:
        arr = np.array(im)
    if arr.ndim == 3:
        arr = arr.any(axis=2)
    return arr > 0
