import math
from dataclasses import replace

import numpy as np
import pytest

from memest import theory
from memest.estimators import EstimatorId, est_t1
from memest.moments import PopulationParams
from memest.simulate import (
    BLOCK_SIZE,
    CSV_HEADER,
    SimulationConfig,
    SimulationError,
    block_rng,
    draw_population_sample,
    empirical_mse_curve,
    run_simulation,
    simulate_means,
    summarize,
)


def test_sample_without_errors_is_true(ref_params):
    s = draw_population_sample(ref_params.without_errors(), block_rng(1, 0))
    np.testing.assert_array_equal(s.y_obs, s.y_true)
    np.testing.assert_array_equal(s.x_obs, s.x_true)
    assert len(s) == ref_params.n


def test_degenerate_x(ref_params):
    s = draw_population_sample(replace(ref_params, sigma2_x=0.0), block_rng(1, 0))
    assert np.all(s.x_true == ref_params.mu_x)


def test_sample_deterministic(ref_params):
    a = draw_population_sample(ref_params, block_rng(42, 0))
    b = draw_population_sample(ref_params, block_rng(42, 0))
    np.testing.assert_array_equal(a.y_obs, b.y_obs)
    np.testing.assert_array_equal(a.x_true, b.x_true)


def test_t1_on_logged_sample(ref_params):
    s = draw_population_sample(ref_params, block_rng(42, 0))
    by_hand = (sum(s.y_obs) / len(s)) * 170.0 / (sum(s.x_obs) / len(s))
    assert est_t1(s, 170.0) == pytest.approx(by_hand, rel=1e-13)


def test_sample_moments_follow_superpopulation():
    p = PopulationParams(mu_y=2, mu_x=5, sigma2_y=4, sigma2_x=9, rho=0.6, sigma2_u=1, sigma2_v=0.25, n=200000)
    s = draw_population_sample(p, block_rng(7, 0))
    assert s.y_true.mean() == pytest.approx(2, abs=0.02)
    assert s.x_true.var() == pytest.approx(9, rel=0.02)
    assert np.corrcoef(s.y_true, s.x_true)[0, 1] == pytest.approx(0.6, abs=0.01)
    u, v = s.y_obs - s.y_true, s.x_obs - s.x_true
    assert u.var() == pytest.approx(1, rel=0.02)
    assert v.var() == pytest.approx(0.25, rel=0.02)
    # errors independent of each other and of the true values
    for a, b in [(u, v), (u, s.y_true), (v, s.x_true), (u, s.x_true)]:
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


def test_worker_count_does_not_change_results(ref_params):
    reps = 3 * BLOCK_SIZE + 17
    a = simulate_means(ref_params, reps, 11, workers=1)
    b = simulate_means(ref_params, reps, 11, workers=3)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])
    cfg = SimulationConfig(ref_params, EstimatorId("T2"), reps, 11)
    assert run_simulation(cfg, workers=1) == run_simulation(cfg, workers=4)


def test_prefix_stability(ref_params):
    """The first blocks do not depend on the total replication count."""
    short = simulate_means(ref_params, BLOCK_SIZE, 5)
    long = simulate_means(ref_params, 2 * BLOCK_SIZE, 5)
    np.testing.assert_array_equal(short[0], long[0][:BLOCK_SIZE])


def test_mean_matches_exact_variance(ref_params):
    res = run_simulation(SimulationConfig(ref_params, EstimatorId("MEAN"), 100_000, 3))
    assert abs(res.empirical_mse - 131.4) < 4 * res.mse_standard_error
    assert res.failed_draws == 0 and not res.unreliable


def test_mean_consistency_over_seeds():
    p = PopulationParams(mu_y=127, mu_x=170, sigma2_y=1278, sigma2_x=3300, rho=0.964,
                         sigma2_u=36, sigma2_v=36, n=10)
    inside = 0
    for seed in range(20):
        res = run_simulation(SimulationConfig(p, EstimatorId("MEAN"), 20_000, seed))
        inside += abs(res.empirical_mse - 131.4) < 4 * res.mse_standard_error
    assert inside >= 19


def test_zero_variance_mean():
    p = PopulationParams(mu_y=3, mu_x=2, sigma2_y=0, sigma2_x=1, rho=0, sigma2_u=0, sigma2_v=1, n=5)
    res = run_simulation(SimulationConfig(p, EstimatorId("MEAN"), 200, 1))
    assert res.empirical_mse == 0 and res.empirical_bias == 0


def test_failed_draws_counted_and_flagged():
    p = PopulationParams(mu_y=1, mu_x=0.2, sigma2_y=1, sigma2_x=1, rho=0.5, n=5)
    res = run_simulation(SimulationConfig(p, EstimatorId("TP", q=0.5, m1=0.5), 2000, 1))
    assert res.failed_draws > 0
    assert res.unreliable
    assert res.replications == 2000


def test_all_draws_failed():
    p = PopulationParams(mu_y=1, mu_x=-1000.0, sigma2_y=1, sigma2_x=1, rho=0.5, n=5)
    with pytest.raises(SimulationError):
        run_simulation(SimulationConfig(p, EstimatorId("TP", q=0.5, m1=0.5), 200, 1))


def test_config_validation(ref_params):
    with pytest.raises(ValueError):
        SimulationConfig(ref_params, EstimatorId("T1"), replications=99)
    with pytest.raises(ValueError):
        SimulationConfig(ref_params, EstimatorId("T1"), seed=-1)
    with pytest.raises(ValueError):
        SimulationConfig(ref_params, EstimatorId("T1"), error_distribution="laplace")


def test_csv_row(ref_params):
    res = run_simulation(SimulationConfig(ref_params, EstimatorId("T1"), 500, 9))
    row = res.to_csv_row().split(",")
    assert len(row) == len(CSV_HEADER.split(","))
    assert row[:4] == ["t1", "10", "500", "9"]
    assert float(row[5]) == res.empirical_mse


def test_curve_common_random_numbers(ref_params):
    cfg = SimulationConfig(ref_params, EstimatorId("T5"), 1000, 4)
    assert len(empirical_mse_curve(cfg, [0.5])) == 1
    curve = empirical_mse_curve(cfg, [0.7, 0.7, 0.9])
    assert curve[0] == curve[1]
    single = run_simulation(replace(cfg, estimator=EstimatorId("T5", alpha=0.9)))
    assert curve[2][1] == single.empirical_mse
    with pytest.raises(ValueError):
        empirical_mse_curve(replace(cfg, estimator=EstimatorId("T1")), [1.0])
    with pytest.raises(ValueError):
        empirical_mse_curve(cfg, [])


@pytest.mark.slow
def test_curve_argmin_near_alpha_star(ref_params):
    p = ref_params.with_n(200)
    grid = np.arange(0, 1.2501, 0.25)
    curve = empirical_mse_curve(SimulationConfig(p, EstimatorId("T5"), 50_000, 8), grid)
    best = min(curve, key=lambda pair: pair[1])[0]
    assert abs(best - theory.optimum_t5(p).alpha_star) <= 0.25


@pytest.fixture(scope="module")
def means_by_n(ref_params):
    # one set of draws per n, shared by every estimator checked below
    return {n: simulate_means(ref_params.with_n(n), 200_000, 100 + n) for n in (20, 100, 500)}


@pytest.mark.slow
@pytest.mark.parametrize("name", ["T1", "T2", "T4", "T5"])
def test_first_order_gap_shrinks_with_n(ref_params, means_by_n, name):
    gaps = []
    for n, (ybar, xbar) in means_by_n.items():
        p = ref_params.with_n(n)
        if name == "T1":
            est, th = EstimatorId("T1"), theory.mse_t1(p)
        elif name == "T2":
            est, th = EstimatorId("T2"), theory.mse_t2(p)
        elif name == "T4":
            est, th = EstimatorId("T4"), theory.mse_t4(p)
        else:
            alpha = theory.optimum_t5(p).alpha_star
            est, th = EstimatorId("T5", alpha=alpha), theory.mse_t5(p, alpha)
        res = summarize(est, p, ybar, xbar, 100 + n)
        gaps.append((abs(res.empirical_mse - th.total) / th.total, res.mse_standard_error / th.total))
    for (g_small, se_small), (g_big, se_big) in zip(gaps, gaps[1:]):
        assert g_big <= g_small + math.hypot(se_small, se_big)


@pytest.mark.slow
def test_family_first_order_mse_agrees_at_large_n(ref_params, means_by_n):
    p = ref_params.with_n(500)
    ybar, xbar = means_by_n[500]
    q_star = theory.optimum_tp(p, 1.0).q_star
    for q, m1 in [(1, 1), (1, 0), (0, 0), (q_star, 1)]:
        res = summarize(EstimatorId("TP", q=q, m1=m1), p, ybar, xbar, 600)
        assert res.empirical_mse == pytest.approx(theory.mse_tp(p, q, m1).total, rel=0.05)
