"""Uplink line-of-sight geometry for one UE/AP pair: path loss, visibility, blockage."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import clamped_arcsin


@dataclass(frozen=True)
class ScenarioGeometry:
    """Heights and blocker dimensions, all in metres."""

    z_a: float = 3.0
    z_u: float = 0.75
    z_b: float = 1.7
    l_b: float = 0.15
    r_ub: float = 0.3

    def __post_init__(self):
        if not (self.z_a > self.z_b > self.z_u > 0):
            raise ValueError(
                f"require z_a > z_b > z_u > 0, got z_a={self.z_a}, z_b={self.z_b}, z_u={self.z_u}"
            )
        if not (0 < self.l_b <= self.r_ub):
            raise ValueError(f"require 0 < l_b <= r_ub, got l_b={self.l_b}, r_ub={self.r_ub}")

    @property
    def z_hat(self) -> float:
        return self.z_a - self.z_u

    @property
    def ub_distance_threshold(self) -> float:
        """Smallest UE-AP distance at which the user's own body can block the link."""
        return self.z_hat * self.r_ub / (self.z_b - self.z_u)

    @property
    def ub_half_angle(self) -> float:
        return math.asin(self.l_b / self.r_ub)


def lambertian_order(phi_half: float) -> float:
    """Lambertian mode number for a half-power semi-angle in radians."""
    if not 0 < phi_half < math.pi / 2:
        raise ValueError(f"half-power semi-angle must lie in (0, pi/2), got {phi_half}")
    return -1.0 / math.log2(math.cos(phi_half))


def concentrator_gain(n: float, fov: float) -> float:
    if n < 1:
        raise ValueError(f"refractive index must be >= 1, got {n}")
    if not 0 < fov < math.pi / 2 + 1e-12:
        raise ValueError(f"field of view must lie in (0, pi/2), got {fov}")
    return n * n / math.sin(fov) ** 2


@dataclass(frozen=True)
class FrontEndOptics:
    """LED radiation pattern and photodiode receiver optics.

    ``c0`` depends on the height difference, so it is bound to a geometry
    through :meth:`c0`.
    """

    half_power_semiangle: float = math.radians(60.0)
    pd_area: float = 7.1e-6
    refractive_index: float = 1.5
    fov: float = math.radians(50.0)

    def __post_init__(self):
        lambertian_order(self.half_power_semiangle)
        concentrator_gain(self.refractive_index, self.fov)
        if self.fov >= math.pi / 2:
            raise ValueError("field of view must be below pi/2")
        if self.pd_area <= 0:
            raise ValueError("pd_area must be positive")

    @property
    def lambertian_order(self) -> float:
        return lambertian_order(self.half_power_semiangle)

    @property
    def concentrator_gain(self) -> float:
        return concentrator_gain(self.refractive_index, self.fov)

    def c0(self, geom: ScenarioGeometry) -> float:
        m = self.lambertian_order
        return (m + 1) * self.pd_area * self.concentrator_gain * geom.z_hat / (2 * math.pi)

    def r_max(self, geom: ScenarioGeometry) -> float:
        """Horizontal UE-AP distance beyond which incidence exceeds the FoV."""
        return geom.z_hat * math.tan(self.fov)


@dataclass(frozen=True)
class UeState:
    """UE placement relative to one AP and its orientation.

    ``theta_hat`` is the polar angle of the UE around the AP minus the
    orientation azimuth; ``alpha`` is the elevation (zenith) angle.
    """

    r: float
    theta_hat: float
    alpha: float
    theta: float = field(default=0.0)

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("r must be non-negative")

    @property
    def beta(self) -> float:
        return self.theta - self.theta_hat

    def positions(self, geom: ScenarioGeometry):
        p_a = np.array([0.0, 0.0, geom.z_a])
        p_u = np.array([self.r * math.cos(self.theta), self.r * math.sin(self.theta), geom.z_u])
        b = self.beta
        o_u = np.array(
            [math.cos(b) * math.sin(self.alpha), math.sin(b) * math.sin(self.alpha), math.cos(self.alpha)]
        )
        return p_a, p_u, o_u


def canonical_theta(theta_hat):
    """Fold an angle difference onto [0, pi]."""
    # fold |theta_hat| so that theta_hat and -theta_hat round identically
    t = np.mod(np.abs(np.asarray(theta_hat, dtype=float)), 2 * np.pi)
    return np.where(t > np.pi, 2 * np.pi - t, t)


def los_path_loss_array(r, theta_hat, alpha, geom: ScenarioGeometry, optics: FrontEndOptics):
    """Vectorised LoS path loss with the visibility factor applied (no blockage)."""
    r = np.asarray(r, dtype=float)
    theta_hat = canonical_theta(theta_hat)
    alpha = np.asarray(alpha, dtype=float)
    m = optics.lambertian_order
    c0 = optics.c0(geom)
    zh = geom.z_hat
    base = zh * np.cos(alpha) - r * np.sin(alpha) * np.cos(theta_hat)
    visible = (base > 0) & (r <= optics.r_max(geom))
    g = c0 * np.maximum(base, 0.0) ** m * (r * r + zh * zh) ** (-(m + 3) / 2)
    return np.where(visible, g, 0.0)


def los_path_loss(state: UeState, geom: ScenarioGeometry, optics: FrontEndOptics) -> float:
    """LoS path loss G of a single UE state; 0 outside the visibility set."""
    return float(los_path_loss_array(state.r, state.theta_hat, state.alpha, geom, optics))


def los_path_loss_vector_form(state: UeState, geom: ScenarioGeometry, optics: FrontEndOptics) -> float:
    """Path loss from explicit position/orientation vectors and radiant/incident angles."""
    p_a, p_u, o_u = state.positions(geom)
    o_a = np.array([0.0, 0.0, -1.0])
    d_vec = p_a - p_u
    dist = float(np.linalg.norm(d_vec))
    cos_phi = float(o_u @ d_vec) / dist
    cos_psi = float(o_a @ (p_u - p_a)) / dist
    if cos_phi <= 0 or cos_psi < math.cos(optics.fov):
        return 0.0
    m = optics.lambertian_order
    return (
        (m + 1) * optics.pd_area * optics.concentrator_gain / (2 * math.pi * dist**2)
        * cos_phi**m * cos_psi
    )


def ub_blocked_array(r, theta_hat, geom: ScenarioGeometry):
    th = canonical_theta(theta_hat)
    in_cone = np.abs(th - np.pi) <= geom.ub_half_angle
    return in_cone & (np.asarray(r) >= geom.ub_distance_threshold)


def ub_blocked(state: UeState, geom: ScenarioGeometry) -> bool:
    """True when the user's own body intercepts the LoS segment."""
    return bool(ub_blocked_array(state.r, state.theta_hat, geom))


def nub_blocked_array(r, r_ab, theta1, geom: ScenarioGeometry):
    r = np.asarray(r, dtype=float)
    r_ab = np.asarray(r_ab, dtype=float)
    height_ok = (r_ab >= r * (geom.z_a - geom.z_b) / geom.z_hat) & (r_ab <= r)
    with np.errstate(divide="ignore"):
        half = clamped_arcsin(np.where(r_ab > 0, geom.l_b / np.maximum(r_ab, 1e-300), 2.0))
    return height_ok & (np.abs(theta1) <= half)


def nub_blocked_single(r: float, r_ab: float, theta1: float, geom: ScenarioGeometry) -> bool:
    """Blocking test for one bystander at distance ``r_ab`` from the AP.

    ``theta1`` is the top-view angle at the AP between the bystander and the UE.
    """
    if r_ab < 0:
        raise ValueError("r_ab must be non-negative")
    return bool(nub_blocked_array(r, r_ab, theta1, geom))


def nub_blockage_prob(r, lambda_b: float, geom: ScenarioGeometry):
    """Average blockage probability by PPP bystanders for a UE at distance r."""
    if lambda_b < 0:
        raise ValueError("lambda_b must be non-negative")
    r = np.asarray(r, dtype=float)
    p = 1.0 - np.exp(-2.0 * geom.l_b * r * lambda_b * (geom.z_b - geom.z_u) / geom.z_hat)
    return float(p) if p.ndim == 0 else p


def nub_shadow_area(r: float, geom: ScenarioGeometry, n_points: int = 4001) -> float:
    """Exact top-view area of bystander positions that block a link of length r.

    Used as the reference for the small-angle form of :func:`nub_blockage_prob`.
    """
    lo = r * (geom.z_a - geom.z_b) / geom.z_hat
    if r <= 0:
        return 0.0
    rho = np.linspace(lo, r, n_points)
    half = clamped_arcsin(geom.l_b / np.maximum(rho, 1e-300))
    return float(np.trapezoid(2.0 * half * rho, rho))
