"""Model construction, curvature signs, volume ratios, classification."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capmono.errors import CriterionMismatch, DomainError
from capmono.geometry import (
    ModelManifold,
    avr,
    bishop_gromov,
    build_model,
    classify_parabolicity,
    cone,
    euclidean,
    power_profile,
    ricci_eigenvalues,
    smoothed_cone,
    sphere_area,
    tail_integral,
    tanh_profile,
    volume_ball,
)

# 50-digit references for the smoothed cone with slope 0.5 in dimension 3.
SC05_THETA_VOL_1 = 0.72970675405776069
SC05_THETA_VOL_10 = 0.32987581719796279
SC05_TAIL_1 = 2.1964117833606968
# Ricci eigenvalues of the tanh profile at r = 1 in dimension 3.
TANH_RIC_RAD_1 = 1.6798973664561043
TANH_RIC_TAN_1 = 2.2599230248420782


class TestSphereArea:
    def test_known_dimensions(self):
        assert abs(sphere_area(1) - 2.0 * math.pi) <= 1e-14
        assert abs(sphere_area(2) - 4.0 * math.pi) <= 1e-13
        assert abs(sphere_area(3) - 2.0 * math.pi**2) <= 1e-13
        assert abs(sphere_area(4) - 8.0 * math.pi**2 / 3.0) <= 1e-13


class TestConstruction:
    def test_families_build(self):
        build_model("euclidean", 3)
        build_model("cone", 4, alpha=0.5)
        build_model("smoothed_cone", 5, alpha=0.3)
        build_model("tanh", 3)
        build_model("cylinder_end", 3)
        build_model("power", 3, gamma=0.6)

    def test_rejects_low_dimension(self):
        with pytest.raises(DomainError):
            build_model("euclidean", 2)

    def test_rejects_oversized_cross_section(self):
        with pytest.raises(DomainError):
            build_model("euclidean", 3, omega=5.0 * math.pi)

    def test_quotient_cross_section_allowed(self):
        m = build_model("cone", 4, omega=sphere_area(3) / 2.0, alpha=1.0)
        assert abs(avr(m) - 0.5) <= 1e-12

    def test_rejects_super_unit_cone(self):
        with pytest.raises(DomainError):
            build_model("cone", 3, alpha=1.5)

    def test_rejects_borderline_power(self):
        # gamma = 0.45 <= 1/(n-1) = 0.5 in dimension 3.
        with pytest.raises(DomainError):
            build_model("power", 3, gamma=0.45)
        build_model("power", 4, gamma=0.45)  # fine one dimension up

    def test_unknown_family(self):
        with pytest.raises(DomainError):
            build_model("torus", 3)


class TestRicci:
    def test_euclidean_is_flat(self):
        m = build_model("euclidean", 4)
        rad, tan = ricci_eigenvalues(m, np.geomspace(0.01, 100.0, 64))
        assert np.max(np.abs(rad)) <= 1e-14
        assert np.max(np.abs(tan)) <= 1e-12

    def test_tanh_frozen_values(self):
        m = build_model("tanh", 3)
        rad, tan = ricci_eigenvalues(m, 1.0)
        assert abs(float(rad) - TANH_RIC_RAD_1) <= 1e-13
        assert abs(float(tan) - TANH_RIC_TAN_1) <= 1e-13

    def test_cone_tangential_positive(self):
        m = build_model("cone", 3, alpha=0.5)
        rad, tan = ricci_eigenvalues(m, np.array([0.5, 1.0, 7.0]))
        assert np.max(np.abs(rad)) == 0.0
        assert np.all(tan > 0)

    @given(
        alpha=st.floats(min_value=0.05, max_value=0.95),
        n=st.sampled_from([3, 4, 5]),
        r=st.floats(min_value=1e-2, max_value=1e3),
    )
    def test_smoothed_cone_admissible_everywhere(self, alpha, n, r):
        m = build_model("smoothed_cone", n, alpha=alpha)
        rad, tan = ricci_eigenvalues(m, r)
        assert float(rad) >= -1e-12
        assert float(tan) >= -1e-12

    def test_power_negative_inside_domain(self):
        # Deep inside r_min the tangential eigenvalue goes negative
        # (in dimension 3 the sign change sits near 0.07 for gamma 0.6),
        # which is why the profile only defines an exterior region.
        p = power_profile(0.6)
        r_bad = 0.05
        tan = (
            -float(p.d2f(r_bad)) / float(p.f(r_bad))
            + (3 - 2) * (1.0 - float(p.df(r_bad)) ** 2) / float(p.f(r_bad)) ** 2
        )
        assert tan < 0
        # At r_min itself the profile is still admissible and f' = 1.
        assert abs(float(p.df(p.r_min)) - 1.0) <= 1e-12


class TestBishopGromov:
    def test_euclidean_ratios_are_one(self):
        m = build_model("euclidean", 3)
        for r in [0.1, 1.0, 42.0]:
            tv, ta = bishop_gromov(m, r)
            assert abs(tv - 1.0) <= 1e-12
            assert abs(ta - 1.0) <= 1e-12

    def test_smoothed_cone_frozen_values(self):
        m = build_model("smoothed_cone", 3, alpha=0.5)
        tv1, _ = bishop_gromov(m, 1.0)
        tv10, _ = bishop_gromov(m, 10.0)
        assert abs(tv1 - SC05_THETA_VOL_1) <= 1e-12
        assert abs(tv10 - SC05_THETA_VOL_10) <= 1e-12

    def test_monotone_and_limits(self):
        m = build_model("smoothed_cone", 4, alpha=0.3)
        grid = np.geomspace(1e-3, 1e3, 40)
        vols = [bishop_gromov(m, float(r))[0] for r in grid]
        areas = [bishop_gromov(m, float(r))[1] for r in grid]
        assert all(a >= b - 1e-10 for a, b in zip(vols, vols[1:]))
        assert all(a >= b - 1e-10 for a, b in zip(areas, areas[1:]))
        assert abs(vols[0] - 1.0) <= 1e-2
        assert abs(vols[-1] - avr(m)) <= 1e-2

    def test_volume_needs_closed_origin(self):
        m = build_model("cylinder_end", 3)
        with pytest.raises(DomainError):
            volume_ball(m, 1.0)


class TestAvr:
    def test_cone_values(self):
        for alpha in [0.3, 0.5, 0.9]:
            for n in [3, 4, 5]:
                m = build_model("cone", n, alpha=alpha)
                assert abs(avr(m) - alpha ** (n - 1)) <= 1e-12

    def test_vanishing_families(self):
        assert avr(build_model("tanh", 3)) == 0.0
        assert avr(build_model("power", 3, gamma=0.6)) == 0.0
        assert avr(build_model("cylinder_end", 5)) == 0.0


class TestParabolicity:
    def test_linear_growth_is_nonparabolic(self):
        for fam, kw in [
            ("euclidean", {}),
            ("cone", {"alpha": 0.3}),
            ("smoothed_cone", {"alpha": 0.7}),
        ]:
            for n in [3, 4, 5]:
                m = build_model(fam, n, **kw)
                assert classify_parabolicity(m) == "nonparabolic"

    def test_bounded_profiles_are_parabolic(self):
        assert classify_parabolicity(build_model("tanh", 3)) == "parabolic"
        assert classify_parabolicity(build_model("cylinder_end", 3), 1.0) == "parabolic"

    def test_power_nonparabolic_despite_zero_avr(self):
        m = build_model("power", 3, gamma=0.6)
        assert classify_parabolicity(m) == "nonparabolic"
        assert avr(m) == 0.0

    def test_tail_integral_frozen(self):
        m = build_model("smoothed_cone", 3, alpha=0.5)
        assert abs(tail_integral(m, 1.0) - SC05_TAIL_1) <= 1e-12

    def test_cone_tail_closed_form(self):
        for alpha in [0.3, 0.9]:
            for n in [3, 4]:
                m = build_model("cone", n, alpha=alpha)
                exact = alpha ** (1 - n) * 2.0 ** (2 - n) / (n - 2)
                assert abs(tail_integral(m, 2.0) - exact) <= 1e-12 * exact
