"""Special functions, root finding and quadrature used by the analytical modules."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

EULER_GAMMA = 0.57721566490153286061

_SERIES_TERMS = 160
_CF_ITERATIONS = 300
_ASYMPTOTIC_SWITCH = 30.0
_CF_SWITCH = -4.0


class BracketError(ValueError):
    """The supplied interval does not bracket a sign change."""


@dataclass(frozen=True)
class RampPair:
    """Positive and negative ramps of a real number: ``[x]+`` and ``[x]-``."""

    plus: float
    minus: float

    @classmethod
    def of(cls, x: float) -> "RampPair":
        return cls(plus=max(x, 0.0), minus=min(x, 0.0))

    @property
    def value(self) -> float:
        return self.plus + self.minus


def ramp_plus(x):
    return np.maximum(x, 0.0)


def ramp_minus(x):
    return np.minimum(x, 0.0)


def clamped_arcsin(x):
    """arcsin extended to the real line: pi/2 above 1 and -pi/2 below -1."""
    return np.arcsin(np.clip(x, -1.0, 1.0))


def sign0(x):
    """Sign function with sgn(0) = 0."""
    return np.sign(x)


def q_function(u):
    """Gaussian tail probability Q(u) = P[N(0,1) > u].

    Accepts scalars or arrays. Underflows to 0 for u beyond ~38.
    """
    u = np.asarray(u, dtype=float)
    from scipy.special import erfc

    out = 0.5 * erfc(u / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def _ei_series(x: np.ndarray) -> np.ndarray:
    # gamma + ln|x| + sum x^k / (k k!)
    term = np.ones_like(x)
    total = np.zeros_like(x)
    for k in range(1, _SERIES_TERMS + 1):
        term = term * x / k
        inc = term / k
        total += inc
        if np.all(np.abs(inc) <= 1e-17 * np.abs(total)):
            break
    return EULER_GAMMA + np.log(np.abs(x)) + total


def _e1_continued_fraction(x: np.ndarray) -> np.ndarray:
    # E1(x) for x >= 1, modified Lentz on the even contraction; converged lanes drop out
    tiny = 1e-300
    b = x + 1.0
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    idx = np.arange(x.size)
    for i in range(1, _CF_ITERATIONS):
        a = -float(i * i)
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h[idx] *= delta
        live = np.abs(delta - 1.0) >= 1e-15
        if not np.any(live):
            break
        idx, b, c, d = idx[live], b[live], c[live], d[live]
    return h * np.exp(-x)


def _ei_asymptotic(x: np.ndarray) -> np.ndarray:
    # e^x / x * sum k!/x^k, truncated at the smallest term
    total = np.ones_like(x)
    term = np.ones_like(x)
    for k in range(1, 60):
        nxt = term * k / x
        done = np.abs(nxt) >= np.abs(term)
        term = np.where(done, 0.0, nxt)
        total += term
        if np.all(term == 0.0) or np.all(np.abs(term) < 1e-17):
            break
    return np.exp(x) / x * total


def exponential_integral_ei(x):
    """Exponential integral Ei(x) (Cauchy principal value for x > 0).

    Series for small |x|, the E1 continued fraction for x <= -4 and an
    asymptotic expansion for x > 30. Raises ValueError at x = 0.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr == 0.0):
        raise ValueError("Ei is singular at x = 0")
    if np.any(~np.isfinite(arr)):
        raise ValueError("Ei requires finite arguments")
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)

    neg_far = flat <= _CF_SWITCH
    pos_far = flat > _ASYMPTOTIC_SWITCH
    near = ~(neg_far | pos_far)
    if np.any(neg_far):
        out[neg_far] = -_e1_continued_fraction(-flat[neg_far])
    if np.any(pos_far):
        out[pos_far] = _ei_asymptotic(flat[pos_far])
    if np.any(near):
        out[near] = _ei_series(flat[near])

    out = out.reshape(np.shape(arr))
    return float(out) if out.ndim == 0 else out


def bisection_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float | None = None,
    max_iter: int = 200,
) -> float:
    """Root of a monotone function bracketed by ``[lo, hi]``.

    Stops when the bracket is narrower than ``tol`` (default 1e-10 of the
    initial width) or after ``max_iter`` halvings.
    """
    if hi < lo:
        lo, hi = hi, lo
    f_lo = f(lo)
    f_hi = f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={f_lo}, {f_hi}")
    if tol is None:
        tol = 1e-10 * (hi - lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def trapezoid_integral(f: Callable, a: float, b: float, n_points: int = 4096) -> float:
    """Composite trapezoid rule on a uniform grid. ``f`` must accept arrays."""
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    if b < a:
        raise ValueError("require a <= b")
    x = np.linspace(a, b, n_points)
    y = np.asarray(f(x), dtype=float)
    if y.ndim == 0:
        y = np.full_like(x, float(y))
    return float(np.trapezoid(y, x))
