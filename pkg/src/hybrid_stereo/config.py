"""Pipeline parameters and the flat ``key = value`` config file format."""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, fields
from typing import Optional

INT32_MAX = 2**31 - 1


@dataclass(frozen=True)
class PipelineConfig:
    """All tunable parameters of the pipeline.

    Costs (``p1``, ``p2``, ``gauss_amplitude``, ``large_cost``) are in census
    Hamming units, i.e. bounded by ``census_window**2 - 1`` per pixel.
    Fields set to ``None`` are derived: ``median_min_valid`` becomes the
    window majority, ``gauss_amplitude`` the maximum raw cost, and
    ``large_cost`` is sized from the image height when the volume is built.

    The penalty and Gaussian defaults were tuned on synthetic scenes; no
    KITTI tuning has been done.
    """

    disparity_range: int = 128
    census_window: int = 5
    p1: int = 16
    p2: int = 32
    lr_threshold: float = 1.0
    median_window: int = 3
    median_min_valid: Optional[int] = None
    support_window: int = 5
    support_min_count: int = 10
    support_max_diff: float = 5.0
    redundancy_k: int = 5
    redundancy_tolerance: float = 1.0
    redundancy_against: str = "support"
    grid_cell: int = 50
    gauss_amplitude: Optional[float] = 16.0
    gauss_sigma: float = 1.0
    gauss_radius: int = 5
    large_cost: Optional[int] = None

    def __post_init__(self):
        if self.disparity_range < 2:
            raise ValueError("disparity_range must be >= 2")
        for name in ("census_window", "median_window", "support_window"):
            w = getattr(self, name)
            if w < 3 or w % 2 == 0:
                raise ValueError(f"{name} must be odd and >= 3, got {w}")
        if not (self.p2 >= self.p1 > 0):
            raise ValueError(f"need p2 >= p1 > 0, got p1={self.p1} p2={self.p2}")
        if self.lr_threshold < 0:
            raise ValueError("lr_threshold must be >= 0")
        if self.median_min_valid is not None and not (
            1 <= self.median_min_valid <= self.median_window**2
        ):
            raise ValueError("median_min_valid must lie in [1, median_window**2]")
        if self.redundancy_k < 1:
            raise ValueError("redundancy_k must be >= 1")
        if self.redundancy_tolerance < 0:
            raise ValueError("redundancy_tolerance must be >= 0")
        if self.redundancy_against not in ("support", "anchors"):
            raise ValueError("redundancy_against must be 'support' or 'anchors'")
        if self.grid_cell < 1:
            raise ValueError("grid_cell must be >= 1")
        if self.gauss_sigma <= 0 or self.gauss_radius < 0:
            raise ValueError("gauss_sigma must be > 0 and gauss_radius >= 0")
        if self.gauss_amplitude is not None and self.gauss_amplitude < 0:
            raise ValueError("gauss_amplitude must be >= 0")
        if self.large_cost is not None and self.large_cost <= self.max_unmasked_aggregate:
            raise ValueError(
                f"large_cost must exceed the largest unmasked aggregated cost "
                f"{self.max_unmasked_aggregate}"
            )

    @property
    def max_raw_cost(self) -> int:
        return self.census_window**2 - 1

    @property
    def min_valid(self) -> int:
        if self.median_min_valid is not None:
            return self.median_min_valid
        return self.median_window**2 // 2 + 1

    @property
    def amplitude(self) -> float:
        if self.gauss_amplitude is not None:
            return float(self.gauss_amplitude)
        return float(self.max_raw_cost)

    @property
    def max_unmasked_aggregate(self) -> int:
        # each direction is bounded by C + P2 once the running minimum is subtracted
        return 3 * (self.max_raw_cost + self.p2)

    def masking_cost(self, height: int) -> int:
        """Cost written into forbidden cost-vector entries for an image of ``height`` rows."""
        if self.large_cost is not None:
            return int(self.large_cost)
        return 3 * (self.max_raw_cost + self.p2) * height + 1

    def check_dimensions(self, height: int, width: int) -> None:
        """Static overflow guard for the aggregation arithmetic."""
        diagonal = math.ceil(math.hypot(height, width))
        if 3 * (self.max_raw_cost + self.p2) * diagonal > INT32_MAX:
            raise OverflowError("image too large for 32-bit aggregation with these penalties")
        if 3 * (self.masking_cost(height) + self.p2) > INT32_MAX:
            raise OverflowError("large_cost too big for 32-bit aggregation")

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _coerce(name: str, text: str):
    field = {f.name: f for f in fields(PipelineConfig)}.get(name)
    if field is None:
        raise ValueError(f"unknown config key {name!r}")
    text = text.strip()
    if text.lower() in ("none", ""):
        return None
    default = field.default
    kind = field.type if isinstance(field.type, str) else getattr(field.type, "__name__", "")
    if "str" in kind:
        return text
    if "float" in kind or isinstance(default, float):
        return float(text)
    return int(text)


def parse_overrides(pairs) -> dict:
    """Turn ``["p1=4", "p2=40"]`` into a typed dict of config fields."""
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise ValueError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        key = key.strip()
        out[key] = _coerce(key, value)
    return out


def load_config(path: Optional[str] = None, overrides=None) -> PipelineConfig:
    """Read a flat ``key = value`` file ('#' starts a comment), then apply overrides."""
    values = {}
    if path is not None:
        with open(os.fspath(path)) as f:
            for lineno, line in enumerate(f, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key = value")
                key, value = line.split("=", 1)
                key = key.strip()
                try:
                    values[key] = _coerce(key, value)
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
    if isinstance(overrides, dict):
        values.update(overrides)
    else:
        values.update(parse_overrides(overrides))
    return PipelineConfig(**values)


def dump_config(cfg: PipelineConfig) -> str:
    lines = []
    for f in fields(PipelineConfig):
        v = getattr(cfg, f.name)
        lines.append(f"{f.name} = {'none' if v is None else v}")
    return "\n".join(lines) + "\n"
