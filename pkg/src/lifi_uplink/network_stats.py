"""Best-AP path loss and channel factor statistics over a Poisson field of APs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import FrontEndOptics, ScenarioGeometry
from .modulation import (
    LinkBudget,
    LowPassChain,
    ModulationConfig,
    channel_factor,
    rate_table,
    thermal_noise_n0,
)
from .pathloss_stats import OrientationModel, cdf_G_raw, monotone_cdf, pdf_G, r0_peak

RADIAL_POINTS = 512


@dataclass(frozen=True)
class ApField:
    lambda_a: float
    r_max: float

    def __post_init__(self):
        if self.lambda_a <= 0:
            raise ValueError("lambda_a must be positive")
        if self.r_max <= 0:
            raise ValueError("r_max must be positive")

    @classmethod
    def for_optics(cls, lambda_a: float, geom: ScenarioGeometry, optics: FrontEndOptics) -> "ApField":
        return cls(lambda_a, optics.r_max(geom))

    @property
    def mean_candidates(self) -> float:
        return self.lambda_a * math.pi * self.r_max**2


@dataclass(frozen=True)
class NoiseModel:
    temperature: float = 290.0
    load_resistance: float = 50.0

    def __post_init__(self):
        if self.temperature <= 0 or self.load_resistance <= 0:
            raise ValueError("temperature and load_resistance must be positive")

    @property
    def n0(self) -> float:
        return thermal_noise_n0(self.temperature, self.load_resistance)


@dataclass(frozen=True)
class Scenario:
    """Everything the network statistics need besides the threshold."""

    geom: ScenarioGeometry
    optics: FrontEndOptics
    orient: OrientationModel
    lambda_b: float
    field: ApField
    budget: LinkBudget

    def radial_grid(self, n: int = RADIAL_POINTS) -> np.ndarray:
        return np.linspace(0.0, self.field.r_max, n)


def _radial_integral(values, rs):
    return np.trapezoid(2 * math.pi * rs * values, rs, axis=-1)


def cdf_G0(T, field: ApField, lambda_b: float, geom: ScenarioGeometry, optics: FrontEndOptics,
           orient: OrientationModel, n_radial: int = RADIAL_POINTS):
    """CDF of the largest path loss over the APs within reach of the UE."""
    T = np.atleast_1d(np.asarray(T, dtype=float))
    rs = np.linspace(0.0, field.r_max, n_radial)
    F = cdf_G_raw(T[:, None], rs[None, :], lambda_b, geom, optics, orient)
    expo = field.lambda_a * (_radial_integral(F, rs) - math.pi * field.r_max**2)
    out = np.where(T < 0, 0.0, np.exp(np.minimum(expo, 0.0)))
    return float(out[0]) if out.size == 1 else out


def xi_to_path_loss(T, budget: LinkBudget):
    return budget.path_loss_for(np.maximum(T, 0.0))


def cdf_xi(T, sc: Scenario, n_radial: int = RADIAL_POINTS):
    """CDF of the channel factor of the best AP (raw closed form)."""
    g = xi_to_path_loss(T, sc.budget)
    return cdf_G0(g, sc.field, sc.lambda_b, sc.geom, sc.optics, sc.orient, n_radial)


def pdf_xi(T, sc: Scenario, n_radial: int = RADIAL_POINTS):
    """Density of the channel factor for T > 0 (chain rule through G0)."""
    T = np.atleast_1d(np.asarray(T, dtype=float))
    rs = sc.radial_grid(n_radial)
    g = xi_to_path_loss(T, sc.budget)
    f = pdf_G(g[:, None], rs[None, :], sc.lambda_b, sc.geom, sc.optics, sc.orient)
    dens_g = sc.field.lambda_a * _radial_integral(f, rs)
    F = np.atleast_1d(cdf_xi(T, sc, n_radial))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(T > 0, F * dens_g * g / (2 * T), 0.0)
    return float(out[0]) if out.size == 1 else out


def outage_probability(sc: Scenario, n_radial: int = RADIAL_POINTS) -> float:
    return float(cdf_xi(0.0, sc, n_radial))


def xi_db(xi):
    with np.errstate(divide="ignore"):
        return 10 * np.log10(xi)


def xi_peak(sc: Scenario) -> float:
    """No AP can deliver a larger channel factor than one straight overhead."""
    return channel_factor(r0_peak(sc.geom, sc.optics), sc.budget)


def xi_grid_db(lo_db: float = 40.0, hi_db: float = 120.0, n: int = 400) -> np.ndarray:
    return np.linspace(lo_db, hi_db, n)


def cdf_xi_curve(db_grid, sc: Scenario, n_radial: int = RADIAL_POINTS):
    """(raw, monotone) CDF of the channel factor on a dB grid."""
    raw = np.atleast_1d(cdf_xi(10 ** (np.asarray(db_grid) / 10), sc, n_radial))
    return raw, monotone_cdf(raw)


def non_outage_quantiles_db(ps, sc: Scenario, db_grid=None, n_radial: int = RADIAL_POINTS) -> np.ndarray:
    """dB levels below which fractions ``ps`` of the non-outage mass lie."""
    if db_grid is None:
        top = xi_db(xi_peak(sc)) + 0.5
        db_grid = np.linspace(top - 80.0, top, 1601)
    db_grid = np.asarray(db_grid, dtype=float)
    f0 = outage_probability(sc, n_radial)
    _, mono = cdf_xi_curve(db_grid, sc, n_radial)
    levels = f0 + (1 - f0) * np.atleast_1d(np.asarray(ps, dtype=float))
    out = np.empty(levels.shape)
    for k, level in enumerate(levels):
        idx = int(np.searchsorted(mono, level, side="left"))
        if idx == 0:
            out[k] = db_grid[0]
        elif idx >= len(db_grid):
            out[k] = db_grid[-1]
        else:
            x0, x1 = db_grid[idx - 1], db_grid[idx]
            y0, y1 = mono[idx - 1], mono[idx]
            out[k] = x1 if y1 == y0 else x0 + (level - y0) * (x1 - x0) / (y1 - y0)
    return out


def non_outage_quantile_db(p: float, sc: Scenario, db_grid=None, n_radial: int = RADIAL_POINTS) -> float:
    """dB level below which a fraction p of the non-outage mass lies."""
    return float(non_outage_quantiles_db([p], sc, db_grid, n_radial)[0])


def average_rate(mode: str, sc: Scenario, config: ModulationConfig, chain: LowPassChain,
                 lo_db: float = 40.0, n_points: int = 400, n_radial: int = RADIAL_POINTS,
                 tail_tolerance: float = 1e-4) -> float:
    """Mean achievable rate over the channel-factor distribution.

    The rate is integrated against the channel-factor CDF on a log grid up to
    the largest reachable xi, where the CDF is 1. The outage atom carries zero
    rate. Integrating against dF rather than f dT keeps the small jumps the
    linearised path-loss CDF has at its anchor switch points.
    """
    hi_db = float(xi_db(xi_peak(sc))) + 1e-6
    db = np.linspace(lo_db, hi_db, n_points)
    xi = 10 ** (db / 10)
    _, F = cdf_xi_curve(db, sc, n_radial)
    if F[-1] < 1 - tail_tolerance:
        raise RuntimeError(f"channel-factor CDF only reaches {F[-1]} at the grid top")
    F = np.concatenate([[outage_probability(sc, n_radial)], F])
    F = np.maximum.accumulate(F)
    rate, _, _ = rate_table(xi, mode, config, chain)
    rate = np.concatenate([[0.0], rate])
    dF = np.diff(F)
    # rates below lo_db are negligible and the jump from outage is charged the lowest grid rate
    return float(np.sum(dF * 0.5 * (rate[1:] + rate[:-1])))
