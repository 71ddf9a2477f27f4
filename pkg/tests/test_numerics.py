import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lifi_uplink.numerics import (
    BracketError,
    RampPair,
    bisection_root,
    clamped_arcsin,
    exponential_integral_ei,
    q_function,
    ramp_minus,
    ramp_plus,
    sign0,
    trapezoid_integral,
)


def mp_q(u):
    return float(mp.erfc(mp.mpf(u) / mp.sqrt(2)) / 2)


def ei_series_oracle(x):
    # gamma + ln|x| + sum x^k/(k k!) in 60-digit arithmetic
    with mp.workdps(60):
        x = mp.mpf(x)
        total = mp.mpf(0)
        term = mp.mpf(1)
        k = 1
        while True:
            term *= x / k
            inc = term / k
            total += inc
            if abs(inc) < mp.mpf(10) ** -50 * max(abs(total), 1):
                break
            k += 1
        return float(mp.euler + mp.log(abs(x)) + total)


class TestQFunction:
    def test_half_at_zero(self):
        assert q_function(0.0) == 0.5

    def test_far_tail(self):
        assert 0 <= q_function(40.0) < 1e-300

    def test_at_one(self):
        assert q_function(1.0) == pytest.approx(mp_q(1.0), rel=1e-14)
        assert q_function(1.0) == pytest.approx(0.158655, abs=5e-7)

    @given(st.floats(-30, 30))
    def test_symmetry(self, u):
        assert q_function(u) + q_function(-u) == pytest.approx(1.0, abs=1e-12)

    def test_strictly_decreasing(self):
        u = np.linspace(-6, 30, 2001)
        assert np.all(np.diff(q_function(u)) < 0)

    def test_against_mpmath(self):
        for u in (-5.0, -1.3, 0.2, 2.669, 6.0, 12.0):
            assert q_function(u) == pytest.approx(mp_q(u), rel=1e-12)


class TestEi:
    def test_spec_values(self):
        assert exponential_integral_ei(-1.0) == pytest.approx(-0.219384, abs=1e-6)
        assert exponential_integral_ei(1.0) == pytest.approx(1.895117, abs=1e-6)

    def test_negative_tail(self):
        assert abs(exponential_integral_ei(-40.0)) < 1e-18

    def test_singular_at_zero(self):
        with pytest.raises(ValueError):
            exponential_integral_ei(0.0)

    @pytest.mark.parametrize("x", [-30, -12.5, -7.1, -4.0, -3.99, -1, -0.3, -1e-3, 1e-3, 0.3725, 1, 7.1, 20, 30])
    def test_series_oracle(self, x):
        ref = ei_series_oracle(x)
        assert exponential_integral_ei(x) == pytest.approx(ref, rel=1e-9)

    def test_asymptotic_branch(self):
        for x in (30.5, 45.0, 200.0):
            assert exponential_integral_ei(x) == pytest.approx(float(mp.ei(x)), rel=1e-12)

    def test_vectorised_matches_scalar(self):
        x = np.array([-50.0, -5.0, -0.5, 0.5, 5.0, 50.0])
        vec = exponential_integral_ei(x)
        assert np.allclose(vec, [exponential_integral_ei(v) for v in x], rtol=0, atol=0)

    @settings(max_examples=50)
    @given(st.floats(1e-3, 29.0), st.floats(1e-3, 1.0))
    def test_monotone_on_each_half_line(self, x, dx):
        # Ei'(x) = e^x / x: increasing for x > 0, decreasing for x < 0
        assert exponential_integral_ei(x + dx) > exponential_integral_ei(x)
        assert exponential_integral_ei(-x - dx) > exponential_integral_ei(-x)


class TestBisection:
    def test_linear(self):
        assert bisection_root(lambda x: x - 2, 0, 10, tol=1e-9) == pytest.approx(2.0, abs=1e-9)

    def test_inverse_q(self):
        root = bisection_root(lambda x: q_function(math.sqrt(x)) - 0.0038, 0, 100)
        ref = float(mp.findroot(lambda x: mp.erfc(mp.sqrt(x) / mp.sqrt(2)) / 2 - mp.mpf("0.0038"), 7.1))
        assert root == pytest.approx(ref, abs=1e-6)
        assert root == pytest.approx(7.125, abs=1e-3)

    def test_bracket_error(self):
        with pytest.raises(BracketError):
            bisection_root(lambda x: x + 1, 0, 10)

    def test_bracket_width(self):
        calls = []

        def f(x):
            calls.append(x)
            return x - math.pi

        root = bisection_root(f, 0, 8, tol=1e-6)
        assert abs(root - math.pi) <= 1e-6
        assert len(calls) < 40

    def test_endpoint_root(self):
        assert bisection_root(lambda x: x, 0.0, 1.0) == 0.0


class TestTrapezoid:
    def test_constant(self):
        assert trapezoid_integral(lambda x: np.ones_like(x), 0, 1) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("n", [2, 3, 17, 4096])
    def test_affine_exact(self, n):
        assert trapezoid_integral(lambda x: x, 0, 2, n) == pytest.approx(2.0, abs=1e-13)

    def test_square(self):
        assert trapezoid_integral(lambda x: x * x, 0, 1, 10_000) == pytest.approx(1 / 3, abs=1e-6)


class TestRamps:
    @given(st.floats(-1e6, 1e6))
    def test_reconstruct(self, x):
        pair = RampPair.of(x)
        assert pair.plus >= 0 and pair.minus <= 0
        assert pair.plus + pair.minus == x
        assert ramp_plus(x) == pair.plus and ramp_minus(x) == pair.minus

    def test_clamped_arcsin(self):
        assert clamped_arcsin(2.0) == pytest.approx(math.pi / 2)
        assert clamped_arcsin(-3.0) == pytest.approx(-math.pi / 2)
        assert clamped_arcsin(0.5) == pytest.approx(math.pi / 6)

    def test_sign0(self):
        assert sign0(0.0) == 0 and sign0(-2.0) == -1 and sign0(3.0) == 1
