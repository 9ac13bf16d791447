import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scdp.numerics import (
    BisectionSpec,
    BracketError,
    PolarIntegrationSpec,
    TailConvergenceError,
    bisect_root,
    erf,
    integrate_polar,
    ln_gamma,
    upper_gamma_regularized,
)

TWO_PI = 2 * math.pi


class TestIntegratePolar:
    def test_gaussian_half_plane(self):
        spec = PolarIntegrationSpec(r_max=8.0)
        got = integrate_polar(lambda r, t: np.exp(-(r**2)), spec, (0.0, math.pi))
        assert got == pytest.approx(math.pi / 2.0, rel=1e-7)

    def test_unit_disc_area(self):
        # aligned domain: polynomial integrand, Simpson is exact
        spec = PolarIntegrationSpec(r_max=1.0, adaptive=False)
        got = integrate_polar(lambda r, t: np.ones_like(r * t), spec)
        assert got == pytest.approx(math.pi, rel=1e-12)
        # indicator variant converges slowly across the jump; loose check
        spec2 = PolarIntegrationSpec(r_max=2.0, n_r=2048, adaptive=False)
        got2 = integrate_polar(lambda r, t: np.where(r <= 1.0, 1.0, 0.0), spec2)
        assert got2 == pytest.approx(math.pi, rel=5e-3)

    def test_quartic_decay_vs_monte_carlo(self):
        spec = PolarIntegrationSpec(r_max=6.0)
        got = integrate_polar(lambda r, t: np.exp(-(r**4)), spec, (0.0, math.pi))
        # Monte Carlo oracle over the half disc r <= 6
        rng = np.random.default_rng(2024)
        n = 1_000_000
        r = 6.0 * np.sqrt(rng.random(n))
        mc = float(np.mean(np.exp(-(r**4)))) * math.pi * 36.0 / 2.0
        mc_err = float(np.std(np.exp(-(r**4)))) * math.pi * 18.0 / math.sqrt(n)
        assert got == pytest.approx(math.pi**1.5 / 4.0, rel=1e-9)
        assert abs(got - mc) < 3 * mc_err + 1e-3 * abs(got)

    def test_linearity(self):
        spec = PolarIntegrationSpec(r_max=5.0, adaptive=False)
        rng = np.random.default_rng(5)
        for _ in range(10):
            a, b = rng.uniform(-3, 3, 2)
            c1, c2 = rng.uniform(0.2, 2.0, 2)

            f = lambda r, t: np.exp(-c1 * r**2) * (1 + 0.3 * np.cos(t))
            g = lambda r, t: np.exp(-c2 * r) * np.sin(t) ** 2
            combined = integrate_polar(lambda r, t: a * f(r, t) + b * g(r, t), spec)
            parts = a * integrate_polar(f, spec) + b * integrate_polar(g, spec)
            assert combined == pytest.approx(parts, rel=1e-10, abs=1e-10)

    def test_adaptive_extends_tail(self):
        # slow quadratic decay: [0, 2] alone misses most of the mass
        spec = PolarIntegrationSpec(r_max=2.0, tail_tol=1e-8)
        got = integrate_polar(lambda r, t: np.exp(-0.1 * r**2), spec)
        assert got == pytest.approx(TWO_PI * 5.0, rel=1e-6)

    def test_tail_divergence_raises(self):
        spec = PolarIntegrationSpec(r_max=1.0)
        with pytest.raises(TailConvergenceError) as err:
            integrate_polar(lambda r, t: np.ones_like(r * t), spec)
        assert err.value.estimate_last > err.value.estimate_prev > 0

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            PolarIntegrationSpec(r_max=0.0)
        with pytest.raises(ValueError):
            PolarIntegrationSpec(r_max=1.0, n_r=17)
        with pytest.raises(ValueError):
            PolarIntegrationSpec(r_max=1.0, n_theta=8)


class TestBisection:
    def test_linear_root(self):
        assert bisect_root(lambda x: x - 2.0, BisectionSpec(0.0, 10.0)) == pytest.approx(
            2.0, abs=1e-8
        )

    def test_exponential_root(self):
        assert bisect_root(lambda x: math.exp(x) - 1.0, BisectionSpec(-1.0, 1.0)) == pytest.approx(
            0.0, abs=1e-8
        )

    def test_bracket_error(self):
        with pytest.raises(BracketError):
            bisect_root(lambda x: x + 5.0, BisectionSpec(0.0, 1.0))

    def test_endpoint_root(self):
        assert bisect_root(lambda x: x, BisectionSpec(0.0, 1.0)) == 0.0

    @given(hi=st.floats(2.5, 50.0))
    @settings(max_examples=50, deadline=None)
    def test_bracket_independence(self, hi):
        g = lambda x: math.tanh(x - 2.0)
        a = bisect_root(g, BisectionSpec(0.0, hi, x_tol=1e-12, f_tol=1e-300))
        b = bisect_root(g, BisectionSpec(1.0, 2.5, x_tol=1e-12, f_tol=1e-300))
        assert abs(a - b) < 1e-9

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            BisectionSpec(1.0, 1.0)
        with pytest.raises(ValueError):
            BisectionSpec(0.0, 1.0, x_tol=0.0)


class TestSpecialFunctions:
    def test_exponential_reduction(self):
        assert upper_gamma_regularized(1.0, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-12)
        assert upper_gamma_regularized(1.0, 0.0) == 1.0

    def test_erf_odd(self):
        assert erf(0.0) == 0.0
        assert erf(1.3) == pytest.approx(-erf(-1.3), rel=1e-15)
        assert erf(np.inf) == 1.0

    def test_incomplete_gamma_against_direct_integral(self):
        a, x = 2.5, 1.3
        t = np.linspace(x, 60.0, 10_000_001)
        integral = float(np.trapezoid(np.exp(-t) * t ** (a - 1.0), t))
        want = integral / math.gamma(a)
        assert upper_gamma_regularized(a, x) == pytest.approx(want, abs=1e-8)

    def test_ln_gamma(self):
        assert ln_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-12)
        with pytest.raises(ValueError):
            ln_gamma(0.0)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            upper_gamma_regularized(-1.0, 2.0)
        with pytest.raises(ValueError):
            upper_gamma_regularized(1.0, -2.0)
