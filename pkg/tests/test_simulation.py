import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vlp_mono import (
    ConfigError,
    GaussianNoise,
    NoNoise,
    QuantizeNoise,
    ScenarioConfig,
    WorldPoint,
    build_cdf,
    compute_metrics,
    run_scenario,
)
from vlp_mono.geometry import Rectangle, TransmitterModel


def test_metrics_exact_estimate():
    m = compute_metrics(WorldPoint(1, 1, 2), [WorldPoint(1, 1, 2)])
    assert m == (0.0, 0.0, 0.0, 0.0)


def test_metrics_three_four_five():
    m = compute_metrics(WorldPoint(0, 0, 0), [WorldPoint(0.03, 0.04, 0)])
    assert m.rmse_xy == pytest.approx(0.05, abs=1e-15)
    assert m.offset_max == pytest.approx(0.05, abs=1e-15)


def test_metrics_two_estimates():
    m = compute_metrics(WorldPoint(0, 0, 0), [WorldPoint(0.03, 0, 0), WorldPoint(-0.03, 0, 0)])
    # sqrt((0.03^2 + 0.03^2) / 2)
    assert m.rmse_xy == pytest.approx(0.03, abs=1e-15)
    assert m.offset_max == pytest.approx(0.03, abs=1e-15)
    assert m.rmse_yz == 0.0


def test_metrics_rejects_empty():
    with pytest.raises(ValueError):
        compute_metrics(WorldPoint(0, 0, 0), [])


small = st.floats(-1, 1, allow_nan=False)


@given(st.lists(st.tuples(small, small, small), min_size=1, max_size=30))
def test_rmse_decomposition(ests):
    truth = WorldPoint(0.1, -0.2, 0.3)
    m = compute_metrics(truth, ests)
    dz2 = np.mean([(e[2] - truth.z) ** 2 for e in ests])
    assert m.rmse_3d**2 == pytest.approx(m.rmse_xy**2 + dz2, rel=1e-12, abs=1e-300)


def test_cdf_examples():
    assert build_cdf([0.02]).points == [(0.02, 1.0)]
    assert build_cdf([0.01, 0.03, 0.02]).points == [(0.01, pytest.approx(1 / 3)), (0.02, pytest.approx(2 / 3)), (0.03, 1.0)]
    assert build_cdf([0.02, 0.02]).points == [(0.02, 1.0)]


@pytest.mark.parametrize("bad", [[], [-0.1], [math.nan], [math.inf]])
def test_cdf_rejects_bad_input(bad):
    with pytest.raises(ValueError):
        build_cdf(bad)


@given(st.lists(st.floats(0, 10, allow_nan=False), min_size=1, max_size=60))
def test_cdf_invariants(values):
    cdf = build_cdf(values)
    v, p = cdf.values, cdf.probabilities
    assert all(a < b for a, b in zip(v, v[1:]))
    assert all(a <= b for a, b in zip(p, p[1:]))
    assert all(0 < x <= 1 for x in p)
    assert p[-1] == 1.0


def test_scenario_validation():
    with pytest.raises(ConfigError):
        ScenarioConfig(grid_step=0)
    with pytest.raises(ConfigError):
        ScenarioConfig(grid_min=3, grid_max=0)
    with pytest.raises(ConfigError):
        ScenarioConfig(trials_per_point=0)
    with pytest.raises(ConfigError):
        ScenarioConfig(receiver_height=5.0)
    with pytest.raises(ConfigError):
        ScenarioConfig(method="gradient")
    with pytest.raises(ConfigError):
        ScenarioConfig(seed=-1)
    with pytest.raises(ConfigError):
        ScenarioConfig(transmitter=TransmitterModel("t", (1.5, 1.5, 4), Rectangle(1, 1)))


def test_default_grid_is_seven_by_seven():
    cfg = ScenarioConfig()
    pts = cfg.grid_points()
    assert len(pts) == 49
    assert pts[0] == (0, 0, 2) and pts[-1] == (3, 3, 2)
    assert cfg.method == "trilaterate"
    assert ScenarioConfig(method="lsq").method == "least_squares"


def test_noiseless_scenario():
    results = run_scenario(ScenarioConfig(noise=NoNoise()))
    assert len(results) == 49
    assert all(r.failures == 0 and r.rmse_3d <= 1e-6 for r in results)


def test_quantized_scenario_bound():
    results = run_scenario(ScenarioConfig(noise=QuantizeNoise(1.0)))
    assert max(r.offset_max for r in results) <= 0.05


def test_gaussian_scenario_is_deterministic():
    cfg = ScenarioConfig(noise=GaussianNoise(2.0), trials_per_point=20, seed=99, grid_step=1.0)
    a, b = run_scenario(cfg), run_scenario(cfg)
    assert [r.estimates for r in a] == [r.estimates for r in b]
    c = run_scenario(replace(cfg, seed=100))
    assert [r.estimates for r in a] != [r.estimates for r in c]


def test_parallel_matches_serial():
    cfg = ScenarioConfig(noise=GaussianNoise(1.0), trials_per_point=5, seed=5, grid_step=1.0)
    assert [r.estimates for r in run_scenario(cfg, n_jobs=2)] == [r.estimates for r in run_scenario(cfg)]


def test_solver_failures_are_counted_not_raised():
    # a 1 m quantization step collapses every image point onto the principal point
    cfg = ScenarioConfig(noise=QuantizeNoise(1e6), grid_step=1.5, trials_per_point=3)
    results = run_scenario(cfg)
    assert len(results) == 9
    assert all(r.failures == 3 and r.successes == 0 for r in results)
    assert all(math.isnan(r.rmse_3d) for r in results)
    assert {s for r in results for s in r.statuses} == {"DegenerateImageError"}


def test_noise_monotonicity_small():
    base = ScenarioConfig(trials_per_point=30, seed=11, grid_step=1.0)
    lo = run_scenario(replace(base, noise=GaussianNoise(1.0)))
    hi = run_scenario(replace(base, noise=GaussianNoise(2.0)))
    assert np.median([r.rmse_3d for r in hi]) >= np.median([r.rmse_3d for r in lo])
