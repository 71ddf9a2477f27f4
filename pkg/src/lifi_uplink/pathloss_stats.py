"""Closed-form statistics of the LoS path loss at a fixed UE-AP distance.

The CDF conditions on the elevation angle, integrates the uniform azimuth
difference exactly, and replaces the remaining elevation integral by a
first-order arccos expansion about an anchor ``Y0`` chosen piecewise in the
threshold. Human blockage enters through the user's own body (a fixed
angular shadow once the UE is far enough away) and PPP bystanders.

Every public function broadcasts over ``T`` and ``r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import FrontEndOptics, ScenarioGeometry, nub_blockage_prob
from .numerics import clamped_arcsin, exponential_integral_ei, ramp_minus, ramp_plus

POSES = {
    "sitting": (41.06, 7.30),
    "standing": (29.78, 7.87),
}

# Ei is singular at 0; arguments landing there are nudged by this much (rad)
EI_NUDGE = 1e-12


@dataclass(frozen=True)
class OrientationModel:
    """Laplace law of the elevation angle (radians) plus uniform azimuth."""

    mu_L: float
    sigma_L: float
    pose: str = "custom"

    def __post_init__(self):
        if not 0 < self.mu_L < math.pi / 2:
            raise ValueError(f"mu_L must lie in (0, pi/2), got {self.mu_L}")
        if self.sigma_L <= 0:
            raise ValueError("sigma_L must be positive")

    @property
    def b_L(self) -> float:
        return math.sqrt(self.sigma_L**2 / 2)

    @classmethod
    def for_pose(cls, pose: str) -> "OrientationModel":
        try:
            mu, sigma = POSES[pose]
        except KeyError:
            raise ValueError(f"unknown pose {pose!r}; expected one of {sorted(POSES)}") from None
        return cls(math.radians(mu), math.radians(sigma), pose)


@dataclass(frozen=True)
class MinorExpressions:
    g0: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    g_th: np.ndarray
    g_max: np.ndarray
    zeta_r: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    y0: np.ndarray
    alpha_t_min: np.ndarray
    alpha_t_max: np.ndarray
    a1: np.ndarray
    a2: np.ndarray


def zeta(r):
    return 0.04942 * np.exp(-0.2393 * r) - 0.8925 * np.exp(-5.159 * r) + 0.5718


def _ctx(geom: ScenarioGeometry, optics: FrontEndOptics):
    return optics.lambertian_order, optics.c0(geom), geom.z_hat


def path_loss_levels(r, geom: ScenarioGeometry, optics: FrontEndOptics, orient: OrientationModel):
    """Threshold-independent levels: (G0, G1, G2, G_th, G_max, zeta, in S1)."""
    m, c0, zh = _ctx(geom, optics)
    r = np.asarray(r, dtype=float)
    d2 = r * r + zh * zh
    scale = c0 * d2 ** (-(m + 3) / 2)
    mu = orient.mu_L
    g0 = scale * zh**m
    # negative bases mean the LED faces away at the anchor orientation
    g1 = scale * np.maximum(zh * math.cos(mu) - r * math.sin(mu), 0.0) ** m
    g2 = scale * (zh * math.cos(mu) + r * math.sin(mu)) ** m
    z = zeta(r)
    g_th = 1.45 * (g2 - g1) / (z + 0.5) + g1
    s1 = r >= geom.ub_distance_threshold
    shadow = math.sqrt(1 - geom.l_b**2 / geom.r_ub**2)
    g_max = np.where(
        s1,
        scale * (zh * math.cos(mu) + r * math.sin(mu) * shadow) ** m,
        c0 * d2 ** (-1.5),
    )
    return g0, g1, g2, g_th, g_max, z, s1


def anchor_y0(T, g1, g2, g_th, z):
    """Piecewise expansion point of the arccos linearisation."""
    T = np.asarray(T, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ramp = (z + 0.5) * (T - g1) / (g2 - g1) - 0.5
    return np.where(
        T < 0, 0.0,
        np.where(T <= g1, -0.5, np.where(T < g_th, ramp, 0.0)),
    )


def anchor_y0_slope(T, g1, g2, g_th, z):
    T = np.asarray(T, dtype=float)
    inside = (T > g1) & (T < g_th)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(inside, (z + 0.5) / (g2 - g1), 0.0)


def _bound_parts(T, r, s1, s2, geom, optics, orient):
    m, c0, zh = _ctx(geom, optics)
    d2 = r * r + zh * zh
    u = np.maximum(T, 0.0) / c0
    u = u ** (1.0 / m) * d2 ** (1.5 / m)
    k1 = np.where(s1, geom.l_b**2 / geom.r_ub**2, 0.0)
    k12 = np.where(s1 & s2, geom.l_b**2 / geom.r_ub**2, 0.0)
    den_min = 1.0 - k12 * r * r / d2
    den_max = 1.0 - k1 * r * r / d2
    v_min = u / np.sqrt(den_min)
    v_max = u / np.sqrt(den_max)
    with np.errstate(divide="ignore"):
        at_min = np.arctan(zh / r / np.sqrt(1.0 - k12))
        at_max = np.arctan(zh / r / np.sqrt(1.0 - k1))
    return u, d2, den_min, den_max, v_min, v_max, at_min, at_max


def alpha_bounds(T, r, s1, s2, geom: ScenarioGeometry, optics: FrontEndOptics, orient: OrientationModel):
    """Centred elevation bounds (alpha_t_min, alpha_t_max) splitting the arccos regimes."""
    T = np.asarray(T, dtype=float)
    r = np.asarray(r, dtype=float)
    s1 = np.asarray(s1, dtype=bool)
    s2 = np.asarray(s2, dtype=bool)
    _, _, _, _, v_min, v_max, at_min, at_max = _bound_parts(T, r, s1, s2, geom, optics, orient)
    a_min = np.abs(clamped_arcsin(v_min) - at_min) - orient.mu_L
    a_max = math.pi - clamped_arcsin(v_max) - at_max - orient.mu_L
    return a_min, a_max


def _nudge(x):
    return np.where(x == 0.0, EI_NUDGE, x)


def a1_a2(alpha_t_min, alpha_t_max, orient: OrientationModel):
    """Laplace-weighted integrals over [alpha_t_min, alpha_t_max].

    a1 * b_L is the integral of exp(-|x|/b_L); a2 is the integral of
    exp(-|x|/b_L) / (tan(mu_L) + x).
    """
    lo = np.asarray(alpha_t_min, dtype=float)
    hi = np.asarray(alpha_t_max, dtype=float)
    b = orient.b_L
    t = math.tan(orient.mu_L)
    a1 = (
        np.exp(ramp_minus(hi) / b) - np.exp(ramp_minus(lo) / b)
        - np.exp(-ramp_plus(hi) / b) + np.exp(-ramp_plus(lo) / b)
    )
    pos_hi = _nudge(-(ramp_plus(hi) + t) / b)
    pos_lo = _nudge(-(ramp_plus(lo) + t) / b)
    neg_hi = _nudge((ramp_minus(hi) + t) / b)
    neg_lo = _nudge((ramp_minus(lo) + t) / b)
    ei = exponential_integral_ei
    # keep the exp/Ei products in log-safe order: e^{t/b} pairs with Ei of negatives
    a2 = (
        math.exp(t / b) * (ei(pos_hi) - ei(pos_lo))
        + math.exp(-t / b) * (ei(neg_hi) - ei(neg_lo))
    )
    return a1, a2


def _cdf_terms(T, r, geom, optics, orient):
    m, c0, zh = _ctx(geom, optics)
    mu, b = orient.mu_L, orient.b_L
    t = math.tan(mu)
    g0, g1, g2, g_th, g_max, z, s1 = path_loss_levels(r, geom, optics, orient)
    s2 = T > g0
    y0 = anchor_y0(T, g1, g2, g_th, z)
    a_min, a_max = alpha_bounds(T, r, s1, s2, geom, optics, orient)
    a1, a2 = a1_a2(a_min, a_max, orient)
    d2 = r * r + zh * zh
    k = (np.maximum(T, 0.0) / c0) ** (1.0 / m) * d2 ** (1.5 / m + 0.5)
    sq = np.sqrt(1.0 - y0 * y0)
    ub = np.where(s1, geom.ub_half_angle / math.pi, 0.0)
    c1 = np.arccos(y0) / (2 * math.pi) + (y0 + zh / r * t) / (2 * math.pi * sq)
    c2 = (zh / math.cos(mu) - k) / (2 * math.pi * b * r * math.cos(mu) * sq)
    tail = (
        (s2 + 1.0) / 2
        + s2 * np.sign(a_min) / 2 * (1 - np.exp(-np.abs(a_min) / b))
        - np.sign(a_max) / 2 * (1 - np.exp(-np.abs(a_max) / b))
    )
    inner = c1 * a1 - c2 * a2 + ub + tail * (1 - ub)
    return dict(
        g0=g0, g1=g1, g2=g2, g_th=g_th, g_max=g_max, z=z, s1=s1, s2=s2, y0=y0,
        a_min=a_min, a_max=a_max, a1=a1, a2=a2, k=k, sq=sq, ub=ub, c1=c1, c2=c2,
        inner=inner,
    )


def minor_expressions(T, r, geom: ScenarioGeometry, optics: FrontEndOptics, orient: OrientationModel) -> MinorExpressions:
    T, r = np.broadcast_arrays(np.asarray(T, dtype=float), np.asarray(r, dtype=float))
    d = _cdf_terms(T, r, geom, optics, orient)
    return MinorExpressions(
        g0=d["g0"], g1=d["g1"], g2=d["g2"], g_th=d["g_th"], g_max=d["g_max"],
        zeta_r=d["z"], s1=d["s1"], s2=d["s2"], y0=d["y0"],
        alpha_t_min=d["a_min"], alpha_t_max=d["a_max"], a1=d["a1"], a2=d["a2"],
    )


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def _nub_survival(r, lambda_b, geom):
    return 1.0 - nub_blockage_prob(r, lambda_b, geom)


def cdf_G_raw(T, r, lambda_b, geom: ScenarioGeometry, optics: FrontEndOptics, orient: OrientationModel):
    """Path-loss CDF exactly as the closed form gives it (not forced monotone).

    Handles r = 0 through the exact corollary and r beyond the FoV radius,
    where the link is never visible, as a point mass at zero.
    """
    T, r = np.broadcast_arrays(np.asarray(T, dtype=float), np.asarray(r, dtype=float))
    out = np.empty(T.shape)
    at_origin = r <= 0
    outside = r > optics.r_max(geom)
    general = ~(at_origin | outside)
    if np.any(at_origin):
        out[at_origin] = cdf_G_r0(T[at_origin], geom, optics, orient)
    if np.any(outside):
        out[outside] = np.where(T[outside] < 0, 0.0, 1.0)
    if np.any(general):
        Tg, rg = T[general], r[general]
        with np.errstate(divide="ignore", invalid="ignore"):
            d = _cdf_terms(Tg, rg, geom, optics, orient)
        surv = _nub_survival(rg, lambda_b, geom)
        val = d["inner"] * surv + 1.0 - surv
        val = np.where(Tg < 0, 0.0, np.where(Tg > d["g_max"], 1.0, val))
        out[general] = val
    return _scalar(out)


def cdf_G(T, r, lambda_b, geom: ScenarioGeometry, optics: FrontEndOptics, orient: OrientationModel):
    """Path-loss CDF at distance r (closed form, clipped to [0, 1])."""
    return _scalar(np.clip(cdf_G_raw(T, r, lambda_b, geom, optics, orient), 0.0, 1.0))


def monotone_cdf(values):
    """Running maximum along the last axis, clipped to [0, 1].

    The linearised closed form can dip slightly; quantile consumers need a
    proper CDF on an increasing grid.
    """
    return np.clip(np.maximum.accumulate(np.asarray(values, dtype=float), axis=-1), 0.0, 1.0)


def pdf_G(T, r, lambda_b, geom: ScenarioGeometry, optics: FrontEndOptics, orient: OrientationModel):
    """Continuous part of the path-loss density; the atom at 0 is :func:`pdf_G_atom`."""
    T, r = np.broadcast_arrays(np.asarray(T, dtype=float), np.asarray(r, dtype=float))
    out = np.zeros(T.shape)
    at_origin = r <= 0
    general = (~at_origin) & (r <= optics.r_max(geom)) & (T > 0)
    if np.any(at_origin):
        out[at_origin] = pdf_G_r0(T[at_origin], geom, optics, orient)
    if np.any(general):
        Tg, rg = T[general], r[general]
        with np.errstate(divide="ignore", invalid="ignore"):
            dens, g_max = _pdf_general(Tg, rg, geom, optics, orient)
        dens = dens * _nub_survival(rg, lambda_b, geom)
        out[general] = np.where(Tg <= g_max, dens, 0.0)
    return _scalar(out)


def pdf_G_atom(r, lambda_b, geom, optics, orient):
    """Probability mass of G = 0 (blockage or invisibility)."""
    return cdf_G(0.0, r, lambda_b, geom, optics, orient)


def _pdf_general(T, r, geom, optics, orient):
    m, c0, zh = _ctx(geom, optics)
    mu, b = orient.mu_L, orient.b_L
    t = math.tan(mu)
    d = _cdf_terms(T, r, geom, optics, orient)
    s1, s2 = d["s1"], d["s2"]
    u, d2, den_min, den_max, v_min, v_max, at_min, at_max = _bound_parts(T, r, s1, s2, geom, optics, orient)
    du = u / (m * T)
    # arcsin saturates when its argument reaches 1; the bound is then flat in T
    rad_min = den_min - u * u
    rad_max = den_max - u * u
    da_min = np.where(rad_min > 0, np.sign(clamped_arcsin(v_min) - at_min) * du / np.sqrt(np.maximum(rad_min, 1e-300)), 0.0)
    da_max = np.where(rad_max > 0, -du / np.sqrt(np.maximum(rad_max, 1e-300)), 0.0)
    dy0 = anchor_y0_slope(T, d["g1"], d["g2"], d["g_th"], d["z"])

    a_min, a_max = d["a_min"], d["a_max"]
    e_min = np.exp(-np.abs(a_min) / b)
    e_max = np.exp(-np.abs(a_max) / b)
    y0, sq = d["y0"], d["sq"]
    c1, c2, a1, a2, ub, k = d["c1"], d["c2"], d["a1"], d["a2"], d["ub"], d["k"]

    da1 = (e_max * da_max - e_min * da_min) / b
    da2 = e_max / (t + a_max) * da_max - e_min / (t + a_min) * da_min
    dtail = s2 * e_min * da_min / (2 * b) - e_max * da_max / (2 * b)
    dc1 = (y0 + zh / r * t) * y0 / (2 * math.pi * sq**3) * dy0
    dc2 = -k / (m * T) / (2 * math.pi * b * r * math.cos(mu) * sq) + c2 * y0 / sq**2 * dy0

    dens = dc1 * a1 + c1 * da1 - dc2 * a2 - c2 * da2 + dtail * (1 - ub)
    return dens, d["g_max"]


# ------------------------------------------------------------------ r = 0

def _r0_angle(T, geom, optics):
    m, c0, zh = _ctx(geom, optics)
    x = np.clip(np.maximum(T, 0.0) * zh**3 / c0, 0.0, 1.0) ** (1.0 / m)
    return np.arccos(x)


def r0_peak(geom: ScenarioGeometry, optics: FrontEndOptics) -> float:
    """Largest path loss directly below the AP: c0 / z_hat^3."""
    return optics.c0(geom) / geom.z_hat**3


def cdf_G_r0(T, geom: ScenarioGeometry, optics: FrontEndOptics, orient: OrientationModel):
    """Exact CDF directly below the AP (no blockage can occur at r = 0)."""
    T = np.asarray(T, dtype=float)
    mu, b = orient.mu_L, orient.b_L
    dev = _r0_angle(T, geom, optics) - mu
    val = 0.5 - 0.5 * np.sign(dev) * (1.0 - np.exp(-np.abs(dev) / b))
    val = np.where(T < 0, 0.0, np.where(T >= r0_peak(geom, optics), 1.0, val))
    return _scalar(val)


def pdf_G_r0(T, geom: ScenarioGeometry, optics: FrontEndOptics, orient: OrientationModel):
    T = np.asarray(T, dtype=float)
    m, c0, zh = _ctx(geom, optics)
    b = orient.b_L
    inside = (T > 0) & (T < r0_peak(geom, optics))
    Ts = np.where(inside, T, 0.5 * r0_peak(geom, optics))
    dev = _r0_angle(Ts, geom, optics) - orient.mu_L
    val = 1.0 / (2 * b * m * Ts) / np.sqrt((c0 / (Ts * zh**3)) ** (2.0 / m) - 1.0) * np.exp(-np.abs(dev) / b)
    return _scalar(np.where(inside, val, 0.0))
