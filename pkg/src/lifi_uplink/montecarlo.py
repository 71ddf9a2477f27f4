"""Sampling oracle for the path-loss and channel-factor distributions.

Trials are split into fixed-size batches. Batch ``i`` always draws from the
substream ``(seed, i)``, so results do not depend on how many worker threads
execute the batches.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import (
    FrontEndOptics,
    ScenarioGeometry,
    los_path_loss_array,
    nub_blocked_array,
    ub_blocked_array,
)
from .modulation import LowPassChain, ModulationConfig, channel_factor, rate_table
from .network_stats import Scenario, xi_db, xi_peak
from .pathloss_stats import OrientationModel

DEFAULT_BATCH = 50_000
LAYOUTS = ("infinite-ppp", "finite-square", "finite-ppp")


@dataclass(frozen=True)
class TrialRng:
    seed: int
    stream_id: int

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class RoomLayout:
    kind: str = "infinite-ppp"
    side: float = 10.0

    def __post_init__(self):
        if self.kind not in LAYOUTS:
            raise ValueError(f"unknown layout {self.kind!r}; expected one of {LAYOUTS}")
        if self.side <= 0:
            raise ValueError("room side must be positive")

    def square_grid(self, lambda_a: float) -> np.ndarray:
        """AP positions of the finite square layout, shape (n, 2)."""
        count = int(round(lambda_a * self.side**2))
        per_side = max(int(round(math.sqrt(count))), 1) if count > 0 else 0
        if per_side == 0:
            return np.zeros((0, 2))
        spacing = self.side / per_side
        ticks = spacing / 2 + spacing * np.arange(per_side)
        xx, yy = np.meshgrid(ticks, ticks, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])


def run_batches(fn, n_trials: int, seed: int, batch_size: int = DEFAULT_BATCH, workers: int = 1):
    """Evaluate ``fn(rng, n)`` over deterministic batches and return results in batch order."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    sizes = [batch_size] * (n_trials // batch_size)
    if n_trials % batch_size:
        sizes.append(n_trials % batch_size)
    jobs = [(TrialRng(seed, i), n) for i, n in enumerate(sizes)]

    def run(job):
        rng, n = job
        return fn(rng.generator(), n)

    if workers <= 1 or len(jobs) == 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))


def sample_alpha(rng: np.random.Generator, orient: OrientationModel, n: int) -> np.ndarray:
    """Laplace elevation angles restricted to [0, pi/2] by rejection."""
    out = np.empty(n)
    filled = 0
    while filled < n:
        need = n - filled
        draw = rng.laplace(orient.mu_L, orient.b_L, size=int(need * 1.05) + 16)
        keep = draw[(draw >= 0) & (draw <= math.pi / 2)][:need]
        out[filled:filled + keep.size] = keep
        filled += keep.size
    return out


def sample_theta(rng: np.random.Generator, n: int) -> np.ndarray:
    # uniform on (-pi, pi]
    return math.pi - 2 * math.pi * rng.random(n)


def sample_ue(rng: np.random.Generator, orient: OrientationModel, n: int = 1):
    """Draw (alpha, theta_hat) for ``n`` independent UEs."""
    return sample_alpha(rng, orient, n), sample_theta(rng, n)


class EmpiricalCDF:
    """Right-continuous empirical CDF of non-negative samples with an atom at 0."""

    def __init__(self, samples):
        self.samples = np.sort(np.asarray(samples, dtype=float))
        self.n = self.samples.size

    def __call__(self, x):
        out = np.searchsorted(self.samples, np.asarray(x, dtype=float), side="right") / self.n
        return float(out) if np.ndim(out) == 0 else out

    @property
    def atom(self) -> float:
        return float(np.count_nonzero(self.samples <= 0.0)) / self.n

    def quantile(self, p):
        return np.quantile(self.samples, p, method="inverted_cdf")

    def sup_distance(self, cdf, grid=None, chunk: int = 100_000) -> float:
        """sup |cdf - ecdf| over sample points (both one-sided limits) and ``grid``.

        ``cdf`` must accept arrays; it is assumed continuous except at 0.
        """
        uniq, counts = np.unique(self.samples, return_counts=True)
        right = np.cumsum(counts) / self.n
        left = right - counts / self.n
        worst = 0.0
        for i in range(0, uniq.size, chunk):
            sl = slice(i, i + chunk)
            F = np.asarray(cdf(uniq[sl]), dtype=float)
            d = np.abs(F - right[sl])
            pos = uniq[sl] > 0
            d_left = np.abs(F[pos] - left[sl][pos])
            worst = max(worst, d.max(initial=0.0), d_left.max(initial=0.0))
        if grid is not None:
            grid = np.asarray(grid, dtype=float)
            worst = max(worst, float(np.max(np.abs(np.asarray(cdf(grid)) - self(grid)))))
        return float(worst)

    def sup_distance_bound(self, grid, F) -> float:
        """Upper bound on sup |F - ecdf| from values of a nondecreasing F on a grid.

        On each cell [g_i, g_i+1] both functions are sandwiched between their
        endpoint values, so the bound exceeds the true distance by at most the
        largest per-cell increment of F or the ecdf. Samples below the grid or
        at 0 are compared against F at the first grid point exactly.
        """
        grid = np.asarray(grid, dtype=float)
        F = np.maximum.accumulate(np.asarray(F, dtype=float))
        at = self(grid)
        before = np.searchsorted(self.samples, grid, side="left") / self.n
        worst = float(np.max(np.abs(F - at)))
        worst = max(worst, float(np.max(F[1:] - at[:-1], initial=0.0)))
        worst = max(worst, float(np.max(before[1:] - F[:-1], initial=0.0)))
        return worst

    def to_rows(self, grid):
        return np.column_stack([grid, self(grid)])


# ------------------------------------------------------------- single link

def _nub_blocked_links(rng, r, theta_ue, lambda_b, geom):
    """Explicit bystander sampling per link; returns a boolean per link.

    Bystanders form a PPP in the disc of radius r around the AP.
    """
    r = np.asarray(r, dtype=float)
    blocked = np.zeros(r.shape, dtype=bool)
    if lambda_b <= 0 or r.size == 0:
        return blocked
    counts = rng.poisson(lambda_b * math.pi * r * r)
    total = int(counts.sum())
    if total == 0:
        return blocked
    owner = np.repeat(np.arange(r.size), counts)
    rho = r[owner] * np.sqrt(rng.random(total))
    phi = 2 * math.pi * rng.random(total)
    theta1 = np.angle(np.exp(1j * (phi - theta_ue[owner])))
    hit = nub_blocked_array(r[owner], rho, theta1, geom)
    blocked[np.unique(owner[hit])] = True
    return blocked


def sample_path_loss(rng, n, r, lambda_b, geom, optics, orient):
    alpha, theta_hat = sample_ue(rng, orient, n)
    rr = np.full(n, float(r))
    g = los_path_loss_array(rr, theta_hat, alpha, geom, optics)
    g = np.where(ub_blocked_array(rr, theta_hat, geom), 0.0, g)
    # UE placed at polar angle 0 around the AP
    nub = _nub_blocked_links(rng, rr, np.zeros(n), lambda_b, geom)
    return np.where(nub, 0.0, g)


def empirical_pathloss_cdf(r: float, lambda_b: float, n_trials: int, seed: int,
                           geom: ScenarioGeometry, optics: FrontEndOptics, orient: OrientationModel,
                           workers: int = 1, batch_size: int = DEFAULT_BATCH) -> EmpiricalCDF:
    """Empirical path-loss CDF at distance r with explicit blockage rules."""
    parts = run_batches(
        lambda rng, n: sample_path_loss(rng, n, r, lambda_b, geom, optics, orient),
        n_trials, seed, batch_size, workers,
    )
    return EmpiricalCDF(np.concatenate(parts))


# ------------------------------------------------------------------ network

def _links_for_batch(rng, n, layout: RoomLayout, sc: Scenario):
    """Candidate links of each trial: (trial index, AP-to-UE dx, dy)."""
    r_max = sc.field.r_max
    la = sc.field.lambda_a
    if layout.kind == "infinite-ppp":
        counts = rng.poisson(la * math.pi * r_max**2, size=n)
        trial = np.repeat(np.arange(n), counts)
        rad = r_max * np.sqrt(rng.random(trial.size))
        ang = 2 * math.pi * rng.random(trial.size)
        # UE at the origin, AP at (rad, ang): vector AP -> UE
        return trial, -rad * np.cos(ang), -rad * np.sin(ang)
    ue = rng.random((n, 2)) * layout.side
    if layout.kind == "finite-square":
        aps = layout.square_grid(la)
        dx = ue[:, None, 0] - aps[None, :, 0]
        dy = ue[:, None, 1] - aps[None, :, 1]
        trial = np.broadcast_to(np.arange(n)[:, None], dx.shape)
        keep = dx * dx + dy * dy <= r_max**2
        return trial[keep], dx[keep], dy[keep]
    counts = rng.poisson(la * layout.side**2, size=n)
    trial = np.repeat(np.arange(n), counts)
    aps = rng.random((trial.size, 2)) * layout.side
    dx = ue[trial, 0] - aps[:, 0]
    dy = ue[trial, 1] - aps[:, 1]
    keep = dx * dx + dy * dy <= r_max**2
    return trial[keep], dx[keep], dy[keep]


def _shared_field_blocked(rng, n, trial, dx, dy, sc: Scenario):
    """Blockage of every link against one bystander field per trial around the UE."""
    geom = sc.geom
    blocked = np.zeros(trial.size, dtype=bool)
    if sc.lambda_b <= 0 or trial.size == 0:
        return blocked
    r_max = sc.field.r_max
    counts = rng.poisson(sc.lambda_b * math.pi * r_max**2, size=n)
    start = np.concatenate([[0], np.cumsum(counts)])
    total = int(start[-1])
    if total == 0:
        return blocked
    rad = r_max * np.sqrt(rng.random(total))
    ang = 2 * math.pi * rng.random(total)
    bx, by = rad * np.cos(ang), rad * np.sin(ang)  # relative to the UE
    per_link = counts[trial]
    link = np.repeat(np.arange(trial.size), per_link)
    offs = np.arange(link.size) - np.repeat(np.cumsum(per_link) - per_link, per_link)
    blk = start[trial[link]] + offs
    # positions relative to the AP: UE sits at (dx, dy)
    ux, uy = dx[link], dy[link]
    px, py = ux + bx[blk], uy + by[blk]
    r = np.hypot(ux, uy)
    r_ab = np.hypot(px, py)
    theta1 = np.angle(np.exp(1j * (np.arctan2(py, px) - np.arctan2(uy, ux))))
    hit = nub_blocked_array(r, r_ab, theta1, geom)
    blocked[np.unique(link[hit])] = True
    return blocked


def sample_best_path_loss(rng, n, layout: RoomLayout, sc: Scenario, shared_blockers: bool = False):
    """Largest path loss over the candidate APs for ``n`` trials."""
    trial, dx, dy = _links_for_batch(rng, n, layout, sc)
    alpha = sample_alpha(rng, sc.orient, n)
    beta = sample_theta(rng, n)
    r = np.hypot(dx, dy)
    theta = np.arctan2(dy, dx)
    theta_hat = theta - beta[trial]
    g = los_path_loss_array(r, theta_hat, alpha[trial], sc.geom, sc.optics)
    g = np.where(ub_blocked_array(r, theta_hat, sc.geom), 0.0, g)
    if shared_blockers:
        nub = _shared_field_blocked(rng, n, trial, dx, dy, sc)
    else:
        nub = _nub_blocked_links(rng, r, theta, sc.lambda_b, sc.geom)
    g = np.where(nub, 0.0, g)
    best = np.zeros(n)
    np.maximum.at(best, trial, g)
    return best


def empirical_factor_cdf(layout: RoomLayout, n_trials: int, seed: int, sc: Scenario,
                         workers: int = 1, shared_blockers: bool = False,
                         batch_size: int = DEFAULT_BATCH) -> EmpiricalCDF:
    """Empirical CDF of the best-AP channel factor for a room layout."""
    parts = run_batches(
        lambda rng, n: sample_best_path_loss(rng, n, layout, sc, shared_blockers),
        n_trials, seed, batch_size, workers,
    )
    return EmpiricalCDF(channel_factor(np.concatenate(parts), sc.budget))


def rate_lookup(mode: str, sc: Scenario, config: ModulationConfig, chain: LowPassChain,
                lo_db: float = 20.0, step_db: float = 0.005):
    """Vectorised xi -> rate map.

    Fixed-bandwidth rates are exact (threshold comparisons). Adaptive rates
    are interpolated linearly in dB from a table with ``step_db`` spacing.
    """
    if mode == "fixed":
        return lambda xi: rate_table(xi, "fixed", config, chain)[0]
    hi_db = float(xi_db(xi_peak(sc))) + 1.0
    db = np.arange(lo_db, hi_db + step_db, step_db)
    table = rate_table(10 ** (db / 10), mode, config, chain)[0]

    def lookup(xi):
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape)
        pos = xi > 0
        out[pos] = np.interp(xi_db(xi[pos]), db, table, left=0.0, right=table[-1])
        return out

    return lookup


def mc_average_rate(layout: RoomLayout, mode: str, n_trials: int, seed: int, sc: Scenario,
                    config: ModulationConfig, chain: LowPassChain, workers: int = 1,
                    shared_blockers: bool = False, batch_size: int = DEFAULT_BATCH):
    """Sample mean of the achievable rate and its standard error."""
    ecdf = empirical_factor_cdf(layout, n_trials, seed, sc, workers, shared_blockers, batch_size)
    rates = rate_lookup(mode, sc, config, chain)(ecdf.samples)
    mean = float(np.mean(rates))
    stderr = float(np.std(rates, ddof=1) / math.sqrt(rates.size)) if rates.size > 1 else math.inf
    return mean, stderr
