"""End-to-end orchestration of the stereo pipeline with per-stage timing."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from .combined import combined_optimize
from .config import PipelineConfig
from .core import DisparityMap, as_gray, rotate180
from .priors import (
    AnchorSet,
    GridVectorField,
    Triangulation,
    delaunay,
    grid_vectors,
    interpolate_priors,
    redundancy_check,
    support_check,
)
from .sgm import consolidate, fast_r3sgm_pass


class PipelineStageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class StageTimings:
    """Wall-clock seconds per stage; ``density`` refers to the final map."""

    stages: list = field(default_factory=list)  # (label, seconds, density or None)
    density: float = 0.0

    def add(self, label: str, seconds: float, density: Optional[float] = None):
        self.stages.append((label, seconds, density))

    @property
    def total(self) -> float:
        return sum(s for _, s, _ in self.stages)

    def as_dict(self) -> dict:
        return {
            "stages": [
                {"stage": label, "seconds": sec, "density": dens}
                for label, sec, dens in self.stages
            ],
            "total_seconds": self.total,
            "density": self.density,
        }

    def report(self) -> str:
        lines = []
        for label, sec, dens in self.stages:
            extra = "" if dens is None else f"  density {dens:6.1%}"
            lines.append(f"{label:<20s} {sec * 1000:9.1f} ms{extra}")
        lines.append(f"{'total':<20s} {self.total * 1000:9.1f} ms  density {self.density:6.1%}")
        return "\n".join(lines)


@dataclass
class PipelineResult:
    disparity: DisparityMap
    timings: StageTimings
    raster: Optional[DisparityMap] = None
    reverse: Optional[DisparityMap] = None  # right-image frame, rotated back
    sparse: Optional[DisparityMap] = None
    support: Optional[DisparityMap] = None
    anchors: Optional[AnchorSet] = None
    triangulation: Optional[Triangulation] = None
    prior: Optional[DisparityMap] = None
    grid: Optional[GridVectorField] = None


def run_pipeline_detailed(left, right, cfg: Optional[PipelineConfig] = None) -> PipelineResult:
    cfg = cfg or PipelineConfig()
    left = as_gray(left)
    right = as_gray(right)
    if left.shape != right.shape:
        raise ValueError(f"stereo images differ in shape: {left.shape} vs {right.shape}")
    cfg.check_dimensions(*left.shape)
    h, w = left.shape
    timings = StageTimings()

    def stage(label, fn, *args):
        t0 = time.perf_counter()
        try:
            out = fn(*args)
        except Exception as exc:
            raise PipelineStageError(label, exc) from exc
        dens = out.density if isinstance(out, DisparityMap) else None
        timings.add(label, time.perf_counter() - t0, dens)
        return out

    raster = stage("raster_pass", fast_r3sgm_pass, left, right, cfg)
    reverse = stage("reverse_pass", fast_r3sgm_pass, rotate180(right), rotate180(left), cfg)
    sparse = stage("consolidate", consolidate, raster, reverse, cfg.lr_threshold)
    support = stage("support_check", support_check, sparse, cfg.support_window,
                    cfg.support_min_count, cfg.support_max_diff)
    anchors = stage("redundancy_check", redundancy_check, support, cfg.redundancy_k,
                    cfg.redundancy_tolerance, cfg.redundancy_against)
    tri = stage("delaunay", delaunay, anchors)
    prior = stage("interpolate_priors", interpolate_priors, tri, w, h,
                  cfg.disparity_range - 1)
    grid = stage("grid_vectors", grid_vectors, support, cfg.grid_cell, cfg.disparity_range)
    final = stage("combined_optimize", combined_optimize, left, right, support, prior, grid, cfg)
    timings.density = final.density
    return PipelineResult(final, timings, raster, rotate180(reverse), sparse, support,
                          anchors, tri, prior, grid)


def run_pipeline(left, right, cfg: Optional[PipelineConfig] = None):
    """Dense left-image disparities and the per-stage timings."""
    res = run_pipeline_detailed(left, right, cfg)
    return res.disparity, res.timings
