"""Shrinking-sphere flow: deficit monotonicity, slope identity, ratios."""

from __future__ import annotations

import math

import numpy as np
import pytest

from capmono.errors import (
    CriterionMismatch,
    DomainError,
    InsufficientSamples,
    NotThreeDimensional,
)
from capmono.geometry import avr, build_model
from capmono.mcf import (
    FlowTrace,
    check_flow,
    flow_sphere,
    huisken_derivative_check,
    iso_ratio,
)
from capmono.numerics import QuadSpec, integrate

# Independently computed reference values (50-digit arithmetic), frozen.
SC05_FLOW_D0 = 58.412835055922853  # initial deficit, alpha=0.5, rho0=5
SC05_FLOW_EXTINCTION = 7.6724863378724225  # rho0=5, stop at 5e-6
TANH_FLOW_EXTINCTION = 0.34527446138520393  # rho0=1, stop at 1e-6


def rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


@pytest.fixture(scope="module")
def flat3():
    return build_model("euclidean", 3)


@pytest.fixture(scope="module")
def cone07():
    return build_model("cone", 3, alpha=0.7)


@pytest.fixture(scope="module")
def cone03():
    return build_model("cone", 3, alpha=0.3)


@pytest.fixture(scope="module")
def cone_quotient():
    return build_model("cone", 3, alpha=0.6, omega=2.0 * math.pi)


@pytest.fixture(scope="module")
def sc05():
    return build_model("smoothed_cone", 3, alpha=0.5)


@pytest.fixture(scope="module")
def tanh_model():
    return build_model("tanh", 3)


@pytest.fixture(scope="module")
def flow_flat(flat3):
    return flow_sphere(flat3, 1.0)


@pytest.fixture(scope="module")
def flow_cone07(cone07):
    return flow_sphere(cone07, 1.0)


@pytest.fixture(scope="module")
def flow_sc05(sc05):
    return flow_sphere(sc05, 5.0)


@pytest.fixture(scope="module")
def flow_tanh(tanh_model):
    return flow_sphere(tanh_model, 1.0)


class TestTraceStructure:
    def test_fields_and_monotone_columns(self, flow_flat):
        tr = flow_flat
        n = tr.times.size
        assert n >= 200
        for arr in (tr.radius, tr.area, tr.volume, tr.iso_diff):
            assert arr.shape == (n,)
        assert tr.times[0] == 0.0
        assert np.all(np.diff(tr.times) > 0.0)
        assert np.all(np.diff(tr.radius) < 0.0)
        assert np.all(np.diff(tr.area) < 0.0)
        assert np.all(np.diff(tr.volume) < 0.0)

    def test_initial_state_matches_request(self, flow_sc05, sc05):
        tr = flow_sc05
        assert rel(tr.radius[0], 5.0) < 1e-14
        f0 = float(sc05.warp.f(5.0))
        assert rel(tr.area[0], sc05.omega * f0 * f0) < 1e-13
        spec = QuadSpec(rel_tol=1e-12, abs_tol=1e-200)
        ball = sc05.omega * integrate(
            lambda s: np.asarray(sc05.warp.f(s)) ** 2, 0.0, 5.0, spec
        )
        assert rel(tr.volume[0], ball) < 1e-11

    def test_isoperimetric_constant_definition(self, flow_sc05, sc05):
        assert rel(flow_sc05.C, math.sqrt(36.0 * math.pi * avr(sc05))) < 1e-15

    def test_deficit_assembled_from_columns(self, flow_tanh):
        tr = flow_tanh
        rebuilt = tr.area**1.5 - tr.C * tr.volume
        assert np.max(np.abs(rebuilt - tr.iso_diff)) == 0.0

    def test_trace_ends_at_extinction_time(self, flow_flat):
        assert flow_flat.extinction_time is not None
        assert flow_flat.times[-1] == flow_flat.extinction_time
        assert flow_flat.radius[-1] <= 1.001e-6 * flow_flat.radius[0]


class TestExtinction:
    def test_flat_quarter(self, flow_flat):
        assert abs(flow_flat.extinction_time - 0.25) < 1e-9

    def test_every_cone_quarter(self, cone07, cone03, cone_quotient):
        for model in (cone07, cone03, cone_quotient):
            tr = flow_sphere(model, 1.0)
            assert abs(tr.extinction_time - 0.25) < 1e-9, model.name

    def test_flat_scaling_law(self, flat3):
        tr = flow_sphere(flat3, 2.0)
        assert abs(tr.extinction_time - 1.0) < 4e-9

    def test_curved_extinctions_match_references(self, flow_sc05, flow_tanh):
        assert rel(flow_sc05.extinction_time, SC05_FLOW_EXTINCTION) < 1e-9
        assert rel(flow_tanh.extinction_time, TANH_FLOW_EXTINCTION) < 1e-9


class TestDeficit:
    def test_sc05_initial_value(self, flow_sc05):
        assert rel(flow_sc05.iso_diff[0], SC05_FLOW_D0) < 1e-12

    def test_nonincreasing_everywhere(
        self, flow_flat, flow_cone07, flow_sc05, flow_tanh
    ):
        for tr in (flow_flat, flow_cone07, flow_sc05, flow_tanh):
            scale = max(abs(float(tr.iso_diff[0])), float(tr.area[0]) ** 1.5)
            assert np.max(np.diff(tr.iso_diff)) <= 1e-10 * scale

    def test_nonnegative_above_floor(self, flow_sc05, flow_tanh):
        for tr in (flow_sc05, flow_tanh):
            scale = max(abs(float(tr.iso_diff[0])), float(tr.area[0]) ** 1.5)
            assert np.min(tr.iso_diff) >= -1e-10 * scale

    def test_vanishes_identically_on_flat_and_cones(
        self, flow_flat, flow_cone07, cone_quotient
    ):
        for tr in (flow_flat, flow_cone07, flow_sphere(cone_quotient, 1.0)):
            scale = float(tr.area[0]) ** 1.5
            assert np.max(np.abs(tr.iso_diff)) <= 1e-10 * scale

    def test_decays_to_zero_at_extinction(self, flow_sc05):
        tr = flow_sc05
        assert tr.iso_diff[0] > 0.0
        assert abs(tr.iso_diff[-1]) <= 1e-10 * tr.iso_diff[0]

    def test_check_reports(self, flow_sc05, sc05):
        reports = check_flow(flow_sc05, sc05)
        names = [r.check for r in reports]
        assert names == [
            "iso_deficit_monotone",
            "iso_deficit_nonnegative",
            "extinction_finite",
        ]
        assert all(r.suite == "mcf" for r in reports)
        assert [r.status for r in reports] == ["PASS", "PASS", "PASS"]

    def test_check_reports_conical_equality(self, flow_cone07, cone07):
        reports = check_flow(flow_cone07, cone07)
        assert [r.status for r in reports] == ["PASS", "EQUALITY", "PASS"]

    def test_oversized_constant_is_reported_red(self, flat3):
        tr = flow_sphere(flat3, 1.0, c_override=20.0)
        reports = check_flow(tr, flat3)
        nonneg = reports[1]
        assert nonneg.check == "iso_deficit_nonnegative"
        assert nonneg.status == "FAIL"

    def test_disabled_constant_keeps_area_term(self, flat3):
        tr = flow_sphere(flat3, 1.0, c_override=0.0)
        assert tr.C == 0.0
        assert np.all(tr.iso_diff > 0.0)
        assert np.max(np.abs(tr.iso_diff - tr.area**1.5)) == 0.0
        assert abs(tr.extinction_time - 0.25) < 1e-9


class TestSlopeIdentity:
    def test_flat_and_cone_at_machine_precision(
        self, flow_flat, flat3, flow_cone07, cone07
    ):
        for tr, model in ((flow_flat, flat3), (flow_cone07, cone07)):
            rep = huisken_derivative_check(tr, model)
            assert rep.status == "PASS"
            assert rep.max_violation <= 1e-9

    def test_curved_within_tolerance(self, flow_sc05, sc05, flow_tanh, tanh_model):
        for tr, model in ((flow_sc05, sc05), (flow_tanh, tanh_model)):
            rep = huisken_derivative_check(tr, model)
            assert rep.status == "PASS"
            assert rep.tolerance == 1e-4
            assert rep.max_violation <= 1e-5

    def test_terminal_layer_is_reported(self, flow_sc05, sc05):
        rep = huisken_derivative_check(flow_sc05, sc05)
        excluded = rep.detail["terminal_stencils_excluded"]
        assert 0 < excluded < 60

    def test_short_trace_rejected(self, flat3):
        t = np.linspace(0.0, 1.0, 50)
        rho = np.linspace(1.0, 0.1, 50)
        area = 4.0 * math.pi * rho**2
        volume = (4.0 * math.pi / 3.0) * rho**3
        tr = FlowTrace(
            times=t,
            radius=rho,
            area=area,
            volume=volume,
            iso_diff=area**1.5 - volume,
            C=1.0,
            extinction_time=None,
        )
        with pytest.raises(InsufficientSamples):
            huisken_derivative_check(tr, flat3)

    def test_all_stencils_in_terminal_layer_rejected(self, flat3):
        # Gaps shrinking by a factor q with q**2 < 0.8 leave every
        # stencil wider than a quarter of its remaining time.
        k = np.arange(200)
        t = (1.0 - 0.88**k) / 0.12
        rho = np.linspace(1.0, 0.1, 200)
        area = 4.0 * math.pi * rho**2
        volume = (4.0 * math.pi / 3.0) * rho**3
        tr = FlowTrace(
            times=t,
            radius=rho,
            area=area,
            volume=volume,
            iso_diff=area**1.5 - volume,
            C=1.0,
            extinction_time=float(t[-1]),
        )
        with pytest.raises(InsufficientSamples):
            huisken_derivative_check(tr, flat3)


class TestArgumentValidation:
    def test_dimension_gate(self):
        flat4 = build_model("euclidean", 4)
        with pytest.raises(NotThreeDimensional):
            flow_sphere(flat4, 1.0)
        with pytest.raises(NotThreeDimensional):
            iso_ratio(flat4, 1.0)

    def test_open_origin_profiles_rejected(self):
        cyl = build_model("cylinder_end", 3)
        pwr = build_model("power", 3, gamma=0.6)
        for model in (cyl, pwr):
            with pytest.raises(DomainError):
                flow_sphere(model, 1.0)
            with pytest.raises(DomainError):
                iso_ratio(model, 1.0)

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
    def test_bad_initial_radius(self, flat3, bad):
        with pytest.raises(DomainError):
            flow_sphere(flat3, bad)
        with pytest.raises(DomainError):
            iso_ratio(flat3, bad)


class TestIsoperimetricRatio:
    def test_flat_is_one(self, flat3):
        for r in (0.3, 1.0, 7.0):
            assert rel(iso_ratio(flat3, r), 1.0) < 1e-12

    def test_cone_is_alpha_squared(self, cone07):
        for r in (0.5, 1.0, 5.0):
            assert rel(iso_ratio(cone07, r), 0.49) < 1e-12

    def test_quotient_cone_matches_volume_ratio(self, cone_quotient):
        expected = avr(cone_quotient)
        assert rel(iso_ratio(cone_quotient, 2.0), expected) < 1e-12

    def test_smoothed_cone_interpolates(self, sc05):
        near = iso_ratio(sc05, 1e-4)
        mid = iso_ratio(sc05, 1.0)
        far = iso_ratio(sc05, 1e4)
        assert abs(near - 1.0) < 1e-3
        assert abs(far - avr(sc05)) < 1e-3
        assert near > mid > far
        assert avr(sc05) < mid < 1.0

    def test_never_below_volume_ratio(self, sc05, tanh_model):
        for model in (sc05, tanh_model):
            floor = avr(model)
            for r in (0.01, 0.1, 1.0, 10.0, 100.0):
                assert iso_ratio(model, r) >= floor - 1e-10
