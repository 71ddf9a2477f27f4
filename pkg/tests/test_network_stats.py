import math

import numpy as np
import pytest

from lifi_uplink.modulation import channel_factor
from lifi_uplink.network_stats import (
    ApField,
    NoiseModel,
    average_rate,
    cdf_G0,
    cdf_xi,
    cdf_xi_curve,
    non_outage_quantile_db,
    non_outage_quantiles_db,
    outage_probability,
    pdf_xi,
    xi_db,
    xi_peak,
)
from lifi_uplink.pathloss_stats import cdf_G_raw, r0_peak


def test_field(geom, optics):
    f = ApField.for_optics(0.1, geom, optics)
    assert f.r_max == pytest.approx(2.25 * math.tan(math.radians(50)))
    assert f.mean_candidates == pytest.approx(0.1 * math.pi * f.r_max**2)
    with pytest.raises(ValueError):
        ApField(0.0, 1.0)


def test_noise_model():
    assert NoiseModel().n0 == pytest.approx(2 * 4 * 1.380649e-23 * 290 / 50)
    with pytest.raises(ValueError):
        NoiseModel(temperature=-1)


def test_top_of_support(scenario):
    top = r0_peak(scenario.geom, scenario.optics) * 1.0001
    assert cdf_G0(top, scenario.field, 0.1, scenario.geom, scenario.optics, scenario.orient) == 1.0


def test_sparse_field_limit(scenario):
    sparse = ApField(1e-9, scenario.field.r_max)
    for T in (0.0, 3e-7, 1e-6):
        assert cdf_G0(T, sparse, 0.1, scenario.geom, scenario.optics, scenario.orient) == pytest.approx(1.0, abs=1e-7)


def test_radial_formula_by_hand(scenario):
    # independent quadrature of the PPP void probability with a fine radial grid
    T = 4e-7
    rs = np.linspace(0, scenario.field.r_max, 4001)
    F = cdf_G_raw(T, rs, 0.1, scenario.geom, scenario.optics, scenario.orient)
    la = scenario.field.lambda_a
    expo = la * np.trapezoid(2 * math.pi * rs * (F - 1), rs)
    got = cdf_G0(T, scenario.field, 0.1, scenario.geom, scenario.optics, scenario.orient)
    assert got == pytest.approx(math.exp(expo), abs=2e-4)


def test_change_of_variables(scenario):
    g = np.array([1e-7, 5e-7, 9e-7, 1.4e-6])
    xi = channel_factor(g, scenario.budget)
    a = cdf_xi(xi, scenario)
    b = cdf_G0(g, scenario.field, scenario.lambda_b, scenario.geom, scenario.optics, scenario.orient)
    assert np.allclose(a, b, rtol=1e-12, atol=0)
    assert cdf_xi(0.0, scenario) == outage_probability(scenario)


def test_curve_is_monotone(scenario):
    db = np.linspace(40, 105, 600)
    raw, mono = cdf_xi_curve(db, scenario)
    assert np.all(np.diff(mono) >= 0)
    assert mono[-1] == 1.0
    assert np.max(mono - raw) < 0.02


def test_pdf_matches_differences(scenario):
    hi = float(xi_db(xi_peak(scenario))) - 2
    xi = 10 ** (np.linspace(60, hi, 20) / 10)
    h = xi * 1e-5
    fd = (cdf_xi(xi + h, scenario) - cdf_xi(xi - h, scenario)) / (2 * h)
    assert np.max(np.abs(pdf_xi(xi, scenario) / fd - 1)) <= 1e-3


def test_pdf_beyond_peak(scenario):
    assert pdf_xi(1.01 * xi_peak(scenario), scenario) == 0.0


def test_quantiles_vectorised(scenario):
    qs = non_outage_quantiles_db([0.1, 0.5, 0.9], scenario)
    assert np.all(np.diff(qs) > 0)
    assert qs[1] == pytest.approx(non_outage_quantile_db(0.5, scenario), abs=1e-12)


def test_average_rate_sparse(cfg):
    sparse = average_rate("adaptive", cfg.scenario(lambda_a=1e-6), cfg.modulation, cfg.chain)
    dense = average_rate("adaptive", cfg.scenario(lambda_a=0.1), cfg.modulation, cfg.chain)
    assert sparse / dense < 1e-4


def test_fixed_below_adaptive(cfg):
    for la in (0.1, 0.5):
        sc = cfg.scenario(lambda_a=la)
        assert average_rate("fixed", sc, cfg.modulation, cfg.chain) <= average_rate("adaptive", sc, cfg.modulation, cfg.chain)


def test_fov_outage_ordering(cfg):
    narrow = cfg.scenario(lambda_a=0.5, fov=math.radians(30))
    wide = cfg.scenario(lambda_a=0.5, fov=math.radians(50))
    assert outage_probability(narrow) > outage_probability(wide)


def test_network_cdf_matches_simulation(cfg):
    # independent and shared bystander fields at three AP densities
    from lifi_uplink.validation import run_suite

    results = run_suite("network", cfg, 200_000, seed=3)
    assert results and all(r.passed for r in results), [r.report_line() for r in results]
