"""Tests for the quadrature, ODE, differencing, and root-finding kernels.

Reference values were computed independently at 50-digit precision and
frozen here as literals.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capmono.errors import (
    Divergence,
    DomainError,
    NoiseDominated,
    NonConvergence,
    RootNotBracketed,
    StepUnderflow,
)
from capmono.numerics import (
    CumulativeIntegral,
    DiffResult,
    OdeSpec,
    QuadSpec,
    bracketed_root,
    central_diff,
    integrate,
    integrate_improper,
    ode_solve,
    tail_power_estimate,
)

# 50-digit quadrature of coth(r)^2 over [1, 2].
COTH_SQ_1_2 = 1.2757205647717832


class TestIntegrate:
    def test_inverse_square(self):
        val = integrate(lambda x: x**-2.0, 1.0, 10.0)
        assert abs(val - 0.9) <= 1e-13

    def test_sine_arch(self):
        val = integrate(np.sin, 0.0, math.pi)
        assert abs(val - 2.0) <= 1e-13

    def test_coth_squared_frozen(self):
        val = integrate(lambda x: 1.0 / np.tanh(x) ** 2, 1.0, 2.0)
        assert abs(val - COTH_SQ_1_2) <= 1e-13

    def test_endpoint_singularity(self):
        # x**-0.8 is integrable at 0; graded refinement must recover
        # full accuracy without evaluating at the endpoint.
        val = integrate(lambda x: x**-0.8, 0.0, 1.0)
        assert abs(val - 5.0) <= 1e-10

    @given(
        coeffs=st.lists(
            st.floats(min_value=-2.0, max_value=2.0), min_size=1, max_size=16
        ),
        a=st.floats(min_value=-3.0, max_value=2.0),
        width=st.floats(min_value=0.1, max_value=4.0),
    )
    def test_polynomial_exactness(self, coeffs, a, width):
        # Degree <= 15 is inside the panel rule's exactness range.
        b = a + width
        poly = np.polynomial.Polynomial(coeffs)
        anti = poly.integ()
        exact = anti(b) - anti(a)
        val = integrate(poly, a, b)
        scale = max(1.0, integrate(lambda x: np.abs(poly(x)), a, b))
        assert abs(val - exact) <= 1e-12 * scale

    def test_budget_exhaustion(self):
        tight = QuadSpec(max_subdivisions=2)
        with pytest.raises(NonConvergence):
            integrate(lambda x: np.sqrt(np.abs(x - 1.0 / 3.0)), 0.0, 1.0, tight)

    def test_bad_interval(self):
        with pytest.raises(DomainError):
            integrate(np.sin, 1.0, 1.0)
        with pytest.raises(DomainError):
            integrate(np.sin, 2.0, 1.0)

    def test_bit_determinism(self):
        fn = lambda x: np.exp(-x) * np.cos(3.0 * x)
        a = integrate(fn, 0.0, 7.0)
        b = integrate(fn, 0.0, 7.0)
        assert a == b


class TestImproper:
    def test_inverse_square_tail(self):
        assert abs(integrate_improper(lambda s: s**-2.0, 1.0, 2.0) - 1.0) <= 1e-12

    def test_scaled_tail(self):
        val = integrate_improper(lambda s: (0.5 * s) ** -2.0, 1.0, 2.0)
        assert abs(val - 4.0) <= 1e-11

    def test_cubic_tail(self):
        val = integrate_improper(lambda s: s**-3.0, 2.0, 3.0)
        assert abs(val - 0.125) <= 1e-13

    @given(
        k=st.sampled_from([2.0, 3.0, 4.0]),
        c=st.floats(min_value=0.1, max_value=10.0),
        lo=st.floats(min_value=0.25, max_value=4.0),
    )
    def test_matches_truncation_plus_analytic_tail(self, k, c, lo):
        spec = QuadSpec()
        whole = integrate_improper(lambda s: c * s**-k, lo, k, spec)
        r_cut = 50.0 * lo
        head = integrate(lambda s: c * s**-k, lo, r_cut, spec)
        tail = c * r_cut ** (1.0 - k) / (k - 1.0)
        assert abs(whole - (head + tail)) <= 2.0 * spec.rel_tol * abs(whole) + 1e-13

    def test_slowly_decaying_integrable_tail(self):
        # Exponent barely above 1; the transformed integrand has an
        # x**-0.9 endpoint singularity.
        val = integrate_improper(lambda s: s**-1.1, 1.0, 1.1)
        assert abs(val - 10.0) <= 1e-9

    def test_power_family_rate(self):
        val = integrate_improper(lambda s: s**-1.2, 1.0, 1.2)
        assert abs(val - 5.0) <= 1e-10

    def test_declared_divergence(self):
        with pytest.raises(Divergence):
            integrate_improper(lambda s: s**-2.0, 1.0, 0.5)

    def test_detected_divergence_harmonic(self):
        # Claimed decay 2 but the integrand is 1/s.
        with pytest.raises(Divergence):
            integrate_improper(lambda s: 1.0 / s, 1.0, 2.0)

    def test_detected_divergence_constant(self):
        with pytest.raises(Divergence):
            integrate_improper(lambda s: np.ones_like(np.asarray(s, dtype=float)), 1.0, 2.0)

    def test_exponential_tail(self):
        val = integrate_improper(lambda s: np.exp(-s), 1.0, 5.0)
        assert abs(val - math.exp(-1.0)) <= 1e-12

    def test_requires_positive_lo(self):
        with pytest.raises(DomainError):
            integrate_improper(lambda s: s**-2.0, 0.0, 2.0)


class TestTailPower:
    def test_pure_power(self):
        est = tail_power_estimate(lambda s: 3.0 * s**-2.0, 1.0)
        assert abs(est - 2.0) <= 1e-6

    def test_constant(self):
        est = tail_power_estimate(lambda s: np.ones_like(np.asarray(s, dtype=float)), 1.0)
        assert abs(est) <= 1e-6

    def test_underflowing_tail(self):
        assert tail_power_estimate(lambda s: np.exp(-np.minimum(s, 700.0) * 2.0), 1.0) == math.inf


class TestCumulative:
    def test_matches_direct_quadrature(self):
        fn = lambda r: 1.0 / np.tanh(r) ** 2
        table = CumulativeIntegral(fn, 1.0)
        assert abs(table.value(2.0) - COTH_SQ_1_2) <= 1e-12
        for r in [0.031, 0.6, 1.0, 1.37, 5.0, 123.4, 9000.0]:
            if r >= 1.0:
                direct = integrate(fn, 1.0, r) if r > 1.0 else 0.0
            else:
                direct = -integrate(fn, r, 1.0)
            assert abs(table.value(r) - direct) <= 1e-11 * max(1.0, abs(direct))

    def test_query_order_independence(self):
        fn = lambda r: r**-2.0
        t1 = CumulativeIntegral(fn, 1.0)
        t2 = CumulativeIntegral(fn, 1.0)
        rs = [7.3, 0.11, 1.9, 250.0, 0.52]
        vals_fwd = [t1.value(r) for r in rs]
        vals_rev = [t2.value(r) for r in reversed(rs)]
        assert vals_fwd == list(reversed(vals_rev))

    def test_additivity(self):
        fn = lambda r: np.exp(-r) * r
        table = CumulativeIntegral(fn, 2.0)
        direct = integrate(fn, 0.5, 6.0)
        assert abs((table.value(6.0) - table.value(0.5)) - direct) <= 1e-13


class TestOde:
    def test_exponential_growth(self):
        spec = OdeSpec(stop_predicate=lambda t, y: 1.0 - t)
        traj = ode_solve(lambda t, y: y, np.array([1.0]), 0.0, spec)
        assert traj.status == "event"
        assert abs(traj.event_time - 1.0) <= 1e-10
        assert abs(traj.event_state[0] - math.e) <= 1e-9

    def test_shrinking_sphere_event(self):
        # y' = -4 with y = rho**2 from 1: rho hits 1e-6 at t = (1 - 1e-12)/4.
        spec = OdeSpec(stop_predicate=lambda t, y: y[0] - 1e-12)
        traj = ode_solve(lambda t, y: np.array([-4.0]), np.array([1.0]), 0.0, spec)
        assert traj.status == "event"
        assert abs(traj.event_time - 0.25) <= 1e-6
        assert abs(traj.event_time - (1.0 - 1e-12) / 4.0) <= 1e-9

    def test_tolerance_tightening_improves_error(self):
        # Nonlinear decay y' = -y**2 from y(0) = 1; event at y = 1/11
        # happens exactly at t = 10.
        errors = []
        for rel in [1e-6, 1e-8, 1e-10]:
            spec = OdeSpec(
                rel_tol=rel,
                abs_tol=rel * 1e-2,
                stop_predicate=lambda t, y: y[0] - 1.0 / 11.0,
            )
            traj = ode_solve(lambda t, y: -(y**2), np.array([1.0]), 0.0, spec)
            errors.append(abs(traj.event_time - 10.0))
        assert errors[2] <= errors[1] <= errors[0]
        assert errors[2] <= 1e-8

    def test_max_step_respected(self):
        spec = OdeSpec(max_step=0.01, stop_predicate=lambda t, y: 0.5 - t)
        traj = ode_solve(lambda t, y: np.array([0.0]), np.array([1.0]), 0.0, spec)
        gaps = np.diff(traj.ts)
        assert np.all(gaps <= 0.01 + 1e-12)

    def test_step_underflow_near_blowup(self):
        with pytest.raises(StepUnderflow) as exc:
            ode_solve(
                lambda t, y: np.array([1.0 / (1.0 - t)]),
                np.array([0.0]),
                0.0,
                OdeSpec(max_steps=10_000),
            )
        partial = exc.value.trajectory
        assert partial is not None
        assert partial.ts[-1] < 1.0

    def test_hermite_resampling(self):
        # Resampling is 4th order in the node spacing, so cap the step.
        spec = OdeSpec(max_step=0.05, stop_predicate=lambda t, y: 2.0 - t)
        traj = ode_solve(lambda t, y: np.array([math.cos(t)]), np.array([0.0]), 0.0, spec)
        for t in np.linspace(0.0, 2.0, 23):
            assert abs(traj.sample(t)[0] - math.sin(t)) <= 5e-8

    def test_bit_determinism(self):
        spec = OdeSpec(stop_predicate=lambda t, y: y[0] - 0.3)
        a = ode_solve(lambda t, y: -(y**1.5), np.array([2.0]), 0.0, spec)
        b = ode_solve(lambda t, y: -(y**1.5), np.array([2.0]), 0.0, spec)
        assert np.array_equal(a.ts, b.ts)
        assert np.array_equal(a.ys, b.ys)
        assert a.event_time == b.event_time


class TestCentralDiff:
    def test_parabola(self):
        res = central_diff(lambda x: x * x, 1.0)
        assert abs(res.value - 2.0) <= 1e-12

    def test_sine_at_zero(self):
        res = central_diff(math.sin, 0.0)
        assert abs(res.value - 1.0) <= 1e-13

    def test_exp_with_error_estimate(self):
        res = central_diff(math.exp, 0.3)
        true = math.exp(0.3)
        assert abs(res.value - true) <= 1e-11
        assert abs(res.value - true) <= 100.0 * res.error + 1e-13

    def test_linear_is_exact(self):
        # Only round-off survives; the quotient at x = 10 carries ~1e-12
        # of cancellation noise.
        res = central_diff(lambda x: 3.0 * x - 1.0, 10.0)
        assert abs(res.value - 3.0) <= 1e-10

    def test_noise_dominated(self):
        noisy = lambda x: math.sin(x) + 1e-4 * math.sin(1e9 * x)
        with pytest.raises(NoiseDominated):
            central_diff(noisy, 0.7)

    def test_rejects_bad_step(self):
        with pytest.raises(DomainError):
            central_diff(math.sin, 0.0, h0=-1.0)


class TestBracketedRoot:
    def test_cosine(self):
        x = bracketed_root(math.cos, 1.0, 2.0)
        assert abs(x - math.pi / 2.0) <= 1e-12

    def test_newton_acceleration(self):
        fn = lambda x: x**3 - 2.0
        dfn = lambda x: 3.0 * x * x
        x = bracketed_root(fn, 1.0, 2.0, dfn=dfn)
        assert abs(x - 2.0 ** (1.0 / 3.0)) <= 1e-12

    def test_not_bracketed(self):
        with pytest.raises(RootNotBracketed):
            bracketed_root(lambda x: x * x + 1.0, -1.0, 1.0)

    def test_endpoint_root(self):
        assert bracketed_root(lambda x: x - 1.0, 1.0, 2.0) == 1.0
