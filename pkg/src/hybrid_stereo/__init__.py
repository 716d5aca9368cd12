"""Top-scanline SGM stereo guided by sparse support-point priors."""

from .config import PipelineConfig, load_config
from .core import INVALID, DisparityMap, load_gray_image, load_kitti_disparity, save_kitti_disparity
from .evaluation import evaluate, interpolate_gaps
from .pipeline import run_pipeline, run_pipeline_detailed

__version__ = "0.1.0"

__all__ = [
    "INVALID",
    "DisparityMap",
    "PipelineConfig",
    "evaluate",
    "interpolate_gaps",
    "load_config",
    "load_gray_image",
    "load_kitti_disparity",
    "run_pipeline",
    "run_pipeline_detailed",
    "save_kitti_disparity",
]
