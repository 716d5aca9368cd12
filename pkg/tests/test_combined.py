import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hybrid_stereo.config import PipelineConfig
from hybrid_stereo.core import INVALID, DisparityMap
from hybrid_stereo.combined import combined_optimize, modify_costs, neutral_priors
from hybrid_stereo.pipeline import run_pipeline, run_pipeline_detailed
from hybrid_stereo.priors import GridVectorField
from hybrid_stereo.sgm import unchecked_pass
from hybrid_stereo.synthetic import shifted_pair


def _single(d=INVALID, nd=64, prior=INVALID, mask=None, cfg=None):
    cfg = cfg or PipelineConfig(disparity_range=nd)
    raw = np.full((1, 1, nd), 20, dtype=np.uint8)
    sup = DisparityMap(np.array([[d]]), nd - 1)
    pri = DisparityMap(np.array([[prior]]), nd - 1)
    m = np.ones((1, 1, nd), dtype=bool) if mask is None else mask
    return modify_costs(raw, sup, pri, GridVectorField(cfg.grid_cell, m), cfg), cfg


def test_support_vector():
    cost, cfg = _single(d=20.0)
    big = cfg.masking_cost(1)
    assert cost[0, 0, 20] == 0
    assert np.all(np.delete(cost[0, 0], 20) == big)


def test_support_beats_grid_mask():
    mask = np.zeros((1, 1, 64), dtype=bool)
    mask[0, 0, :3] = True
    cost, _ = _single(d=20.0, mask=mask)
    assert cost[0, 0, 20] == 0


def test_exact_prior_drops_by_amplitude():
    cost, cfg = _single(prior=30.0)
    assert cost[0, 0, 30] == 20 - cfg.amplitude
    assert cost[0, 0, 0] == 20
    # outside the radius nothing changes
    assert cost[0, 0, 30 + cfg.gauss_radius + 1] == 20


def test_drop_floored_at_zero():
    cfg = PipelineConfig(disparity_range=16, gauss_amplitude=50.0)
    cost, _ = _single(prior=5.0, nd=16, cfg=cfg)
    assert cost[0, 0, 5] == 0


def test_grid_mask_wins_over_prior():
    mask = np.ones((1, 1, 64), dtype=bool)
    mask[0, 0, 3] = False
    cost, cfg = _single(prior=3.0, mask=mask)
    assert cost[0, 0, 3] == cfg.masking_cost(1)


def test_mismatched_grid_range():
    cfg = PipelineConfig(disparity_range=16)
    sup, pri, _ = neutral_priors(4, 4, cfg)
    grid = GridVectorField(50, np.ones((1, 1, 8), dtype=bool))
    with pytest.raises(ValueError):
        modify_costs(np.zeros((4, 4, 16), dtype=np.uint8), sup, pri, grid, cfg)


@settings(max_examples=40, deadline=None)
@given(
    arrays(np.uint8, (4, 5, 12), elements=st.integers(0, 24)),
    arrays(np.float64, (4, 5), elements=st.floats(0, 11)),
    arrays(np.bool_, (4, 5)),
    arrays(np.bool_, (4, 5)),
    arrays(np.bool_, (1, 1, 12)),
)
def test_modified_costs_bounded(raw, vals, has_prior, has_support, mask):
    cfg = PipelineConfig(disparity_range=12, grid_cell=50)
    prior = DisparityMap(np.where(has_prior, vals, INVALID), 11)
    support = DisparityMap(np.where(has_support, np.rint(vals), INVALID), 11)
    if not mask.any():
        mask[..., 0] = True
    cost = modify_costs(raw, support, prior, GridVectorField(50, mask), cfg)
    big = cfg.masking_cost(4)
    assert cost.min() >= 0 and cost.max() <= big
    free = ~has_support[..., None] & np.broadcast_to(mask, cost.shape)
    assert np.all(cost[free] <= raw[free])


def test_neutral_priors_reduce_to_plain_pass():
    left, right = shifted_pair(64, 40, 5, seed=2)
    cfg = PipelineConfig(disparity_range=16)
    neutral = combined_optimize(left, right, *neutral_priors(40, 64, cfg), cfg)
    assert neutral == unchecked_pass(left, right, cfg)


def test_correct_priors_at_shift():
    left, right = shifted_pair(256, 128, 7, seed=11)
    cfg = PipelineConfig(disparity_range=32)
    sup, _, grid = neutral_priors(128, 256, cfg)
    prior = DisparityMap(np.full((128, 256), 7.0), 31)
    out = combined_optimize(left, right, sup, prior, grid, cfg)
    assert out.density >= 0.99
    assert np.mean(out.values == 7) >= 0.98


def _flat_top_pair():
    rng = np.random.default_rng(0)
    tex = rng.integers(0, 256, (64, 103), dtype=np.uint8)
    tex[0:30, 20:90] = 120
    return tex[:, :96].copy(), tex[:, 7:103].copy()


def test_wrong_support_pulls_rows_below():
    left, right = _flat_top_pair()
    cfg = PipelineConfig(disparity_range=32)
    sup, prior, grid = neutral_priors(64, 96, cfg)
    base = combined_optimize(left, right, sup, prior, grid, cfg)
    planted = sup.values.copy()
    planted[2, 50] = 20
    pulled = combined_optimize(left, right, sup.with_values(planted), prior, grid, cfg)
    below = (slice(3, 5), slice(49, 52))
    assert np.all(base.values[below] == 0)
    assert np.all(pulled.values[below] == 20)


def test_pipeline_on_shifted_pair():
    left, right = shifted_pair(256, 128, 7, seed=0)
    disp, timings = run_pipeline(left, right, PipelineConfig(disparity_range=32))
    assert disp.density >= 0.99
    assert np.mean(disp.values == 7) >= 0.98
    labels = [s[0] for s in timings.stages]
    assert labels[0] == "raster_pass" and labels[-1] == "combined_optimize"


def test_pipeline_constant_pair():
    img = np.full((40, 60), 128, dtype=np.uint8)
    disp, _ = run_pipeline(img, img, PipelineConfig(disparity_range=16))
    assert disp.shape == (40, 60)
    assert np.all((disp.values == INVALID) | ((disp.values >= 0) & (disp.values <= 15)))


def test_pipeline_tiny_image():
    left, right = shifted_pair(10, 10, 2, seed=4)
    res = run_pipeline_detailed(left, right, PipelineConfig(disparity_range=8))
    assert res.grid.masks.shape[:2] == (1, 1)
    assert res.disparity.shape == (10, 10)


def test_pipeline_shape_mismatch():
    with pytest.raises(ValueError):
        run_pipeline(np.zeros((8, 8)), np.zeros((9, 8)), PipelineConfig(disparity_range=4))


def test_timing_report_lists_stages():
    left, right = shifted_pair(40, 20, 3, seed=1)
    _, timings = run_pipeline(left, right, PipelineConfig(disparity_range=8))
    text = timings.report()
    for label in ("raster_pass", "reverse_pass", "delaunay", "combined_optimize"):
        assert label in text
    assert timings.total >= 0


def test_support_beats_grid_and_prior_at_once():
    mask = np.ones((1, 1, 64), dtype=bool)
    mask[0, 0, 20] = False
    cost, cfg = _single(d=20.0, prior=40.0, mask=mask)
    assert cost[0, 0, 20] == 0
    assert cost[0, 0, 40] == cfg.masking_cost(1)


def test_final_map_denser_than_sparse_stages():
    left, right = shifted_pair(128, 64, 5, seed=8)
    res = run_pipeline_detailed(left, right, PipelineConfig(disparity_range=24))
    for sparse in (res.raster, res.sparse, res.support):
        assert res.disparity.density >= sparse.density
