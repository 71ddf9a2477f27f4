"""PAM with single-carrier frequency-domain LMMSE equalisation.

All link-level quantities are driven by the channel factor ``xi`` (Hz), which
folds optical swing, spectral responsivity, path loss and noise PSD into one
number. Functions take scalars; the ``*_table`` helpers evaluate many ``xi``
at once for the Monte Carlo and network integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import bisection_root, q_function

BOLTZMANN = 1.380649e-23


@dataclass(frozen=True)
class LowPassChain:
    f_c_led: float = 35e6
    f_c_pd: float = 230e6
    fft_size: int = 512

    def __post_init__(self):
        if self.f_c_led <= 0 or self.f_c_pd <= 0:
            raise ValueError("cut-off frequencies must be positive")
        if self.fft_size < 2 or self.fft_size % 2:
            raise ValueError("fft_size must be an even integer >= 2")

    def normalised_frequencies(self) -> np.ndarray:
        """Subcarrier frequencies divided by f_s, with the upper half mapped negative."""
        k = np.arange(self.fft_size)
        return np.where(k < self.fft_size // 2, k, k - self.fft_size) / self.fft_size


@dataclass(frozen=True)
class ModulationConfig:
    constellation_set: tuple[int, ...] = (2, 4, 8, 16, 32)
    target_ber: float = 3.8e-3
    cp_length: int = 16
    fixed_bandwidth: float = 100e6

    def __post_init__(self):
        if not self.constellation_set:
            raise ValueError("constellation_set must not be empty")
        for m in self.constellation_set:
            if m < 2 or m & (m - 1):
                raise ValueError(f"constellation sizes must be powers of two >= 2, got {m}")
        if not 0 < self.target_ber < 0.5:
            raise ValueError("target_ber must lie in (0, 0.5)")
        if self.cp_length < 0:
            raise ValueError("cp_length must be non-negative")
        if self.fixed_bandwidth <= 0:
            raise ValueError("fixed_bandwidth must be positive")

    @classmethod
    def up_to(cls, m_max: int, **kw) -> "ModulationConfig":
        sizes = tuple(2**i for i in range(1, int(math.log2(m_max)) + 1))
        return cls(constellation_set=sizes, **kw)


def thermal_noise_n0(temperature: float = 290.0, load_resistance: float = 50.0) -> float:
    """Single-sided noise PSD N0 (A^2/Hz); the double-sided PSD N0/2 is 4 k T / R_L."""
    if temperature <= 0 or load_resistance <= 0:
        raise ValueError("temperature and load resistance must be positive")
    return 2.0 * 4.0 * BOLTZMANN * temperature / load_resistance


@dataclass(frozen=True)
class LinkBudget:
    delta_p_o: float = 0.44
    f_lambda: float = 6.0
    n0: float = thermal_noise_n0()
    channel_factor: float = 0.0

    def __post_init__(self):
        if self.delta_p_o <= 0 or self.f_lambda <= 0 or self.n0 <= 0:
            raise ValueError("delta_p_o, f_lambda and n0 must be positive")
        if self.channel_factor < 0:
            raise ValueError("channel_factor must be non-negative")

    def with_xi(self, xi: float) -> "LinkBudget":
        return LinkBudget(self.delta_p_o, self.f_lambda, self.n0, xi)

    def path_loss_for(self, xi):
        """Inverse of :func:`channel_factor`: the path loss giving channel factor xi."""
        return np.sqrt(2.0 * np.asarray(xi, dtype=float) * self.n0) / (self.delta_p_o * self.f_lambda)


def channel_factor(g, budget: LinkBudget):
    """Channel factor xi = (dP_o F_lambda G)^2 / (2 N0), in Hz."""
    g = np.asarray(g, dtype=float)
    if np.any(g < 0):
        raise ValueError("path loss must be non-negative")
    xi = (budget.delta_p_o * budget.f_lambda * g) ** 2 / (2.0 * budget.n0)
    return float(xi) if xi.ndim == 0 else xi


def crest_factor(m: int) -> float:
    if m < 2:
        raise ValueError("constellation size must be >= 2")
    return math.sqrt(3.0 * (m - 1) / (m + 1))


def lowpass_gain_sq(k: int, f_s: float, chain: LowPassChain) -> float:
    """|H_lp[k]|^2 of the cascaded LED and PD first-order responses."""
    if not 0 <= k < chain.fft_size:
        raise ValueError(f"subcarrier index out of range: {k}")
    f = chain.normalised_frequencies()[k] * f_s
    return 1.0 / ((1 + (f / chain.f_c_led) ** 2) * (1 + (f / chain.f_c_pd) ** 2))


def _gain_sq_grid(f_s, chain: LowPassChain) -> np.ndarray:
    # shape (..., K)
    f = np.multiply.outer(np.asarray(f_s, dtype=float), chain.normalised_frequencies())
    return 1.0 / ((1 + (f / chain.f_c_led) ** 2) * (1 + (f / chain.f_c_pd) ** 2))


def subcarrier_snr(k: int, f_s: float, m: int, budget: LinkBudget, chain: LowPassChain) -> float:
    return budget.channel_factor * lowpass_gain_sq(k, f_s, chain) / (crest_factor(m) ** 2 * f_s)


def _lmmse_snr(xi, f_s, m: int, chain: LowPassChain):
    xi = np.asarray(xi, dtype=float)
    f_s = np.asarray(f_s, dtype=float)
    gamma_k = (xi / (crest_factor(m) ** 2 * f_s))[..., None] * _gain_sq_grid(f_s, chain)
    # (1/mean(1/(1+g)) - 1) rewritten without the cancellation at small g
    return np.mean(gamma_k / (1.0 + gamma_k), axis=-1) / np.mean(1.0 / (1.0 + gamma_k), axis=-1)


def lmmse_snr(f_s: float, m: int, budget: LinkBudget, chain: LowPassChain) -> float:
    """Post-equalisation SNR: harmonic combination of the subcarrier SNRs."""
    return float(_lmmse_snr(budget.channel_factor, f_s, m, chain))


def _ber(xi, f_s, m: int, chain: LowPassChain):
    gamma = np.maximum(_lmmse_snr(xi, f_s, m, chain), 0.0)
    return 2.0 * (m - 1) / (m * math.log2(m)) * q_function(np.sqrt(3.0 * gamma / (m * m - 1)))


def pam_ber_from_snr(m: int, gamma_pam: float) -> float:
    return 2.0 * (m - 1) / (m * math.log2(m)) * q_function(math.sqrt(3.0 * gamma_pam / (m * m - 1)))


def pam_ber(m: int, f_s: float, budget: LinkBudget, chain: LowPassChain) -> float:
    """BER of Gray-coded bipolar M-PAM after LMMSE equalisation."""
    return float(_ber(budget.channel_factor, f_s, m, chain))


def cp_efficiency(config: ModulationConfig, chain: LowPassChain) -> float:
    return chain.fft_size / (chain.fft_size + config.cp_length)


def rate_fixed(budget: LinkBudget, config: ModulationConfig, chain: LowPassChain) -> float:
    """Rate at the fixed bandwidth using the largest constellation meeting the target BER."""
    f_s = config.fixed_bandwidth
    usable = [
        m for m in config.constellation_set
        if pam_ber(m, f_s, budget, chain) <= config.target_ber
    ]
    if not usable:
        return 0.0
    return f_s * cp_efficiency(config, chain) * math.log2(max(usable))


# bandwidth search bracket
F_LO = 1e3
F_HI = 10e9
F_CAP = 100e9


def max_bandwidth_for_M(m: int, budget: LinkBudget, config: ModulationConfig, chain: LowPassChain) -> float:
    """Largest f_s for which M-PAM still meets the target BER; 0 if none does."""
    xi = budget.channel_factor
    target = config.target_ber
    if xi <= 0:
        return 0.0

    def excess(f_s):
        return float(_ber(xi, f_s, m, chain)) - target

    if excess(F_LO) > 0:
        return 0.0
    hi = F_HI
    while excess(hi) <= 0:
        if hi >= F_CAP:
            return F_CAP
        hi = min(2.0 * hi, F_CAP)
    # BER residual must be tiny, so bisect in log f_s to full precision
    log_root = bisection_root(lambda u: excess(math.exp(u)), math.log(F_LO), math.log(hi), tol=1e-13)
    return math.exp(log_root)


def rate_adaptive_detail(budget: LinkBudget, config: ModulationConfig, chain: LowPassChain):
    """Best (rate, M, f_s) over constellations with bandwidth maximised per M."""
    eff = cp_efficiency(config, chain)
    best = (0.0, 0, 0.0)
    for m in config.constellation_set:
        f_s = max_bandwidth_for_M(m, budget, config, chain)
        rate = f_s * eff * math.log2(m)
        if rate > best[0]:
            best = (rate, m, f_s)
    return best


def rate_adaptive(budget: LinkBudget, config: ModulationConfig, chain: LowPassChain) -> float:
    return rate_adaptive_detail(budget, config, chain)[0]


def rate_fixed_detail(budget: LinkBudget, config: ModulationConfig, chain: LowPassChain):
    rate = rate_fixed(budget, config, chain)
    if rate == 0.0:
        return 0.0, 0, 0.0
    bits = rate / (config.fixed_bandwidth * cp_efficiency(config, chain))
    return rate, int(round(2**bits)), config.fixed_bandwidth


# ---------------------------------------------------------------- vectorised

def max_bandwidth_table(xi, m: int, config: ModulationConfig, chain: LowPassChain, iterations: int = 80):
    """:func:`max_bandwidth_for_M` over an array of channel factors.

    Bisection runs in log f_s on all entries in lockstep; with 80 halvings of a
    bracket spanning at most ln(1e8) the bandwidth is resolved to ~1e-23
    relative, well below the scalar routine's tolerance.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    target = config.target_ber
    out = np.zeros_like(xi)
    live = xi > 0
    if not np.any(live):
        return out
    x = xi[live]
    feasible = _ber(x, np.full_like(x, F_LO), m, chain) <= target
    hi = np.full_like(x, F_HI)
    for _ in range(8):
        grow = feasible & (_ber(x, hi, m, chain) <= target) & (hi < F_CAP)
        if not np.any(grow):
            break
        hi = np.where(grow, np.minimum(2 * hi, F_CAP), hi)
    lo_u = np.full_like(x, math.log(F_LO))
    hi_u = np.log(hi)
    for _ in range(iterations):
        mid = 0.5 * (lo_u + hi_u)
        ok = _ber(x, np.exp(mid), m, chain) <= target
        lo_u = np.where(ok, mid, lo_u)
        hi_u = np.where(ok, hi_u, mid)
    res = np.where(feasible, np.exp(0.5 * (lo_u + hi_u)), 0.0)
    out[live] = res
    return out


def rate_adaptive_table(xi, config: ModulationConfig, chain: LowPassChain):
    """Adaptive rate, best M and f_s for each channel factor in ``xi``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    eff = cp_efficiency(config, chain)
    best_rate = np.zeros_like(xi)
    best_m = np.zeros(xi.shape, dtype=int)
    best_fs = np.zeros_like(xi)
    for m in config.constellation_set:
        fs = max_bandwidth_table(xi, m, config, chain)
        rate = fs * eff * math.log2(m)
        better = rate > best_rate
        best_rate = np.where(better, rate, best_rate)
        best_m = np.where(better, m, best_m)
        best_fs = np.where(better, fs, best_fs)
    return best_rate, best_m, best_fs


def fixed_rate_thresholds(config: ModulationConfig, chain: LowPassChain) -> dict[int, float]:
    """Smallest channel factor at which each M meets the target BER at the fixed f_s."""
    f_s = config.fixed_bandwidth
    out = {}
    for m in config.constellation_set:
        def excess(u, m=m):
            return float(_ber(math.exp(u), f_s, m, chain)) - config.target_ber
        lo, hi = math.log(1.0), math.log(1e30)
        if excess(hi) > 0:
            out[m] = math.inf
            continue
        out[m] = math.exp(bisection_root(excess, lo, hi, tol=1e-12))
    return out


def rate_fixed_table(xi, config: ModulationConfig, chain: LowPassChain):
    """Fixed-bandwidth rate and chosen M for each channel factor.

    BER is strictly decreasing in xi, so each M is usable exactly above its
    threshold; the chosen M is the largest usable one.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    eff = cp_efficiency(config, chain)
    thresholds = fixed_rate_thresholds(config, chain)
    best_m = np.zeros(xi.shape, dtype=int)
    for m in sorted(config.constellation_set):
        ok = xi >= thresholds[m]
        # guard the threshold edge with a direct BER evaluation
        edge = np.isclose(xi, thresholds[m], rtol=1e-9, atol=0.0)
        if np.any(edge):
            ok[edge] = _ber(xi[edge], config.fixed_bandwidth, m, chain) <= config.target_ber
        best_m = np.where(ok, np.maximum(best_m, m), best_m)
    with np.errstate(divide="ignore"):
        bits = np.where(best_m > 0, np.log2(np.maximum(best_m, 1)), 0.0)
    rate = config.fixed_bandwidth * eff * bits
    fs = np.where(best_m > 0, config.fixed_bandwidth, 0.0)
    return rate, best_m, fs


def rate_table(xi, mode: str, config: ModulationConfig, chain: LowPassChain):
    if mode == "adaptive":
        return rate_adaptive_table(xi, config, chain)
    if mode == "fixed":
        return rate_fixed_table(xi, config, chain)
    raise ValueError(f"unknown rate mode {mode!r}")
