import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import kstest

from lifi_uplink.geometry import nub_blockage_prob
from lifi_uplink.montecarlo import (
    EmpiricalCDF,
    RoomLayout,
    TrialRng,
    empirical_factor_cdf,
    empirical_pathloss_cdf,
    mc_average_rate,
    run_batches,
    sample_alpha,
    sample_ue,
)
from lifi_uplink.pathloss_stats import cdf_G, cdf_G_r0, r0_peak


def test_trial_rng_streams():
    a = TrialRng(42, 3).generator().random(5)
    b = TrialRng(42, 3).generator().random(5)
    c = TrialRng(42, 4).generator().random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_sample_ue_statistics(orient):
    rng = TrialRng(1, 0).generator()
    alpha, th = sample_ue(rng, orient, 400_000)
    n = alpha.size
    assert np.all((alpha >= 0) & (alpha <= math.pi / 2))
    assert abs(alpha.mean() - orient.mu_L) <= 3 * orient.sigma_L / math.sqrt(n)
    assert np.all((th > -math.pi) & (th <= math.pi))
    ks = kstest(th, "uniform", args=(-math.pi, 2 * math.pi)).statistic
    assert ks <= 1.63 / math.sqrt(n)


def test_sampling_deterministic(orient):
    a = sample_alpha(TrialRng(9, 1).generator(), orient, 1000)
    b = sample_alpha(TrialRng(9, 1).generator(), orient, 1000)
    assert np.array_equal(a, b)


def test_batches_independent_of_workers():
    fn = lambda rng, n: rng.random(n)
    one = np.concatenate(run_batches(fn, 10_001, 5, batch_size=1000, workers=1))
    four = np.concatenate(run_batches(fn, 10_001, 5, batch_size=1000, workers=4))
    assert np.array_equal(one, four)
    with pytest.raises(ValueError):
        run_batches(fn, 0, 5)


def test_empirical_cdf():
    e = EmpiricalCDF([0.0, 0.0, 1.0, 2.0])
    assert e.atom == 0.5
    assert e(0.0) == 0.5 and e(1.5) == 0.75 and e(5) == 1.0
    # a uniform law on [0, 2] with an atom of 1/2 at 0
    F = lambda x: np.where(np.asarray(x) < 0, 0.0, np.minimum(0.5 + 0.25 * np.asarray(x), 1.0))
    assert e.sup_distance(F) == pytest.approx(0.25)
    grid = np.linspace(0, 2, 2001)
    assert e.sup_distance_bound(grid, F(grid)) == pytest.approx(0.25, abs=1e-3)


def test_no_blockers_close_in(geom, optics, orient):
    # below the user-shadow distance and without bystanders only facing away zeroes the link
    r, n = 0.5, 400_000
    e = empirical_pathloss_cdf(r, 0.0, n, 3, geom, optics, orient)
    zh, mu, b = geom.z_hat, orient.mu_L, orient.b_L
    dens = lambda a: math.exp(-abs(a - mu) / b)
    norm = quad(dens, 0, math.pi / 2, points=[mu])[0]
    away = lambda a: dens(a) * math.acos(min(1.0, zh / (r * math.tan(a)))) / math.pi
    want = quad(away, math.atan(zh / r), math.pi / 2)[0] / norm
    assert abs(e.atom - want) <= 3 * math.sqrt(want / n)


def test_atom_matches_composition(geom, optics, orient):
    r, lb, n = 1.0, 0.5, 400_000
    e = empirical_pathloss_cdf(r, lb, n, 4, geom, optics, orient)
    want = 1 - (1 - nub_blockage_prob(r, lb, geom)) * (1 - math.asin(geom.l_b / geom.r_ub) / math.pi)
    se = math.sqrt(want * (1 - want) / n)
    assert abs(e.atom - want) <= 3 * se + 2e-3  # facing-away mass at r = 1 is about 1e-3


def test_single_link_vs_closed_form(geom, optics, orient):
    e = empirical_pathloss_cdf(0.7, 0.5, 200_000, 8, geom, optics, orient)
    grid = np.linspace(0, 1.8e-6, 500)
    assert e.sup_distance(lambda T: cdf_G(T, 0.7, 0.5, geom, optics, orient), grid) <= 0.05


def test_corollary_sampling(geom, optics, orient):
    e = empirical_pathloss_cdf(0.0, 0.3, 200_000, 2, geom, optics, orient)
    peak = r0_peak(geom, optics)
    assert e.sup_distance(lambda T: cdf_G_r0(T, geom, optics, orient), np.linspace(0, peak, 500)) <= 0.01


def test_square_grid():
    layout = RoomLayout("finite-square", 10.0)
    aps = layout.square_grid(0.25)
    assert aps.shape == (25, 2)
    assert aps.min() == pytest.approx(1.0) and aps.max() == pytest.approx(9.0)
    assert layout.square_grid(1.0).shape == (100, 2)
    with pytest.raises(ValueError):
        RoomLayout("hexagonal")


def test_factor_cdf_outage(scenario):
    e = empirical_factor_cdf(RoomLayout(), 100_000, 6, scenario)
    p = scenario.field.mean_candidates
    assert 0 < e.atom < 1
    # at least the empty-disc probability
    assert e.atom >= math.exp(-p) - 3 * math.sqrt(math.exp(-p) / 100_000)


def test_shared_and_independent_agree(scenario):
    a = empirical_factor_cdf(RoomLayout(), 100_000, 6, scenario)
    b = empirical_factor_cdf(RoomLayout(), 100_000, 7, scenario, shared_blockers=True)
    grid = np.quantile(a.samples, np.linspace(0.01, 0.99, 99))
    assert np.max(np.abs(a(grid) - b(grid))) < 0.01


def test_factor_cdf_worker_invariance(scenario):
    a = empirical_factor_cdf(RoomLayout("finite-ppp"), 30_000, 1, scenario, workers=1, batch_size=4000)
    b = empirical_factor_cdf(RoomLayout("finite-ppp"), 30_000, 1, scenario, workers=3, batch_size=4000)
    assert np.array_equal(a.samples, b.samples)


def test_average_rate_sparse_and_stderr(cfg):
    sparse = cfg.scenario(lambda_a=1e-6)
    mean, _ = mc_average_rate(RoomLayout(), "adaptive", 20_000, 1, sparse, cfg.modulation, cfg.chain)
    assert mean == 0.0
    sc = cfg.scenario()
    _, se1 = mc_average_rate(RoomLayout(), "fixed", 50_000, 1, sc, cfg.modulation, cfg.chain)
    _, se2 = mc_average_rate(RoomLayout(), "fixed", 100_000, 1, sc, cfg.modulation, cfg.chain)
    assert se2 / se1 == pytest.approx(1 / math.sqrt(2), rel=0.05)
