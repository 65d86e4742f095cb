"""Bending energy of boundary surfaces against its sharp scale-free floor.

A closed surface in an end of asymptotic area ratio ``theta`` satisfies

    integral of |H/(n-1)|^(n-1)  >=  theta * |S^(n-1)|,

with equality exactly on the exactly-conical geometries.  This module
evaluates both sides for coordinate spheres of a radial model and for
confocal spheroids in flat space, reports the margin, and derives the
mean-curvature bound obtained by weighting the boundary flux of the
exterior level function, together with the classical constants that the
area ratio controls in dimension three.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CriterionMismatch, DomainError, NotApplicable
from .geometry import ModelManifold, area_sphere, avr, sphere_area
from .monotone import du_beta, dpsi_beta, limit_t0, u_beta
from .potential import RadialPotential, SpheroidPotential
from .report import CheckReport, make_report

__all__ = [
    "SurfaceSpec",
    "coordinate_sphere",
    "confocal_spheroid_surface",
    "willmore_energy",
    "check_willmore",
    "KasueBounds",
    "kasue_bounds",
    "kasue_statement_detail",
    "DerivedConstants",
    "derived_constants",
    "ale_infimum",
]


# Status tolerances, relative to the natural scale of each comparison.
_MARGIN_SLACK = 1e-10
_EQUALITY_SLACK = 1e-10

# Sampling of the end when a supremum over all radii is required.
_SUP_FACTOR = 1e4
_SUP_COUNT = 400


@dataclass(frozen=True)
class SurfaceSpec:
    """A closed surface on which the bending energy is evaluated.

    Exactly one host is populated: a coordinate sphere ``{r = radius}``
    of a radial model, or a member ``{xi = const}`` of the confocal
    family of a spheroid in flat space (the degenerate round case hosts
    centered spheres instead, described by ``radius``).  ``area`` is
    positive and the mean curvature is finite by construction;
    coordinate spheres carry a constant mean curvature, stored in
    ``mean_curvature``, while spheroid surfaces have a varying one,
    available through the host's ``mean_curvature(xi, eta)``.
    """

    kind: str
    dim: int
    area: float
    model: ModelManifold | None = None
    radius: float | None = None
    spheroid: SpheroidPotential | None = None
    xi: float | None = None
    mean_curvature: float | None = None


def coordinate_sphere(model: ModelManifold, radius: float) -> SurfaceSpec:
    """The surface ``{r = radius}`` of a radial model."""
    radius = float(radius)
    if not (math.isfinite(radius) and radius > model.warp.r_min):
        raise DomainError(
            f"coordinate sphere radius must exceed the profile domain "
            f"start {model.warp.r_min!r}, got {radius!r}"
        )
    f = float(model.warp.f(radius))
    df = float(model.warp.df(radius))
    if not (f > 0.0 and math.isfinite(df)):
        raise DomainError(
            f"profile is not a positive differentiable warp at {radius!r}"
        )
    return SurfaceSpec(
        kind="coordinate_sphere",
        dim=model.n,
        area=area_sphere(model, radius),
        model=model,
        radius=radius,
        mean_curvature=(model.n - 1) * df / f,
    )


def confocal_spheroid_surface(
    sp: SpheroidPotential,
    xi: float | None = None,
    radius: float | None = None,
) -> SurfaceSpec:
    """A member of the confocal family of a spheroid in flat 3-space.

    Defaults to the boundary surface itself.  The degenerate round case
    hosts centered spheres, selected by ``radius``.
    """
    if sp.is_sphere:
        if xi is not None:
            raise NotApplicable(
                "degenerate spheroid: its exterior is foliated by "
                "centered spheres, pass radius instead of xi"
            )
        radius = sp.a if radius is None else float(radius)
        if not (math.isfinite(radius) and radius >= sp.a):
            raise DomainError(
                f"sphere radius must lie in the closed exterior, "
                f"at least {sp.a!r}, got {radius!r}"
            )
        return SurfaceSpec(
            kind="confocal_spheroid",
            dim=3,
            area=4.0 * math.pi * radius * radius,
            spheroid=sp,
            radius=radius,
            mean_curvature=2.0 / radius,
        )
    if radius is not None:
        raise NotApplicable(
            "nondegenerate spheroid surfaces are selected by xi, not radius"
        )
    xi = sp.xi0 if xi is None else float(xi)
    if not (math.isfinite(xi) and xi > 1.0):
        raise DomainError(f"confocal coordinate must exceed 1, got {xi!r}")
    return SurfaceSpec(
        kind="confocal_spheroid",
        dim=3,
        area=sp.area(xi),
        spheroid=sp,
        xi=xi,
    )


def willmore_energy(surface: SurfaceSpec, n: int | None = None) -> float:
    """Scale-invariant bending energy: surface integral of |H/(n-1)|^(n-1).

    Coordinate spheres admit the closed form ``omega * |f'(r)|^(n-1)``:
    the warp value cancels between the curvature and the area element.
    Spheroid surfaces are integrated in the polar coordinate.
    """
    if n is not None and int(n) != surface.dim:
        raise DomainError(
            f"surface lives in dimension {surface.dim}, energy requested "
            f"for dimension {int(n)}"
        )
    n = surface.dim
    if surface.kind == "coordinate_sphere":
        model = surface.model
        df = float(model.warp.df(surface.radius))
        return model.omega * abs(df) ** (n - 1)
    sp = surface.spheroid
    if sp.is_sphere:
        # |H/2|^2 * 4 pi r^2 with H = 2/r: the radius drops out.
        return 4.0 * math.pi
    xi = surface.xi

    def density(eta):
        return np.abs(sp.mean_curvature(xi, eta) / 2.0) ** 2

    return sp.surface_integral(xi, density)


def _end_rigidity_residual(model: ModelManifold, radius: float) -> float:
    """Supremum of |f''| over the end beyond ``radius``.

    Zero exactly when the end is an exact cone (or an exact cylinder):
    the geometries on which the energy floor is attained.
    """
    rs = np.geomspace(radius, _SUP_FACTOR * radius, _SUP_COUNT)
    return float(np.max(np.abs(model.warp.d2f(rs))))


def _is_flat_three_space(model: ModelManifold) -> bool:
    probe = np.array([0.5, 1.0, 2.0])
    return (
        model.n == 3
        and model.warp.slope == 1.0
        and model.area_ratio() == 1.0
        and bool(np.all(model.warp.f(probe) == probe))
    )


def check_willmore(model: ModelManifold, surface: SurfaceSpec) -> CheckReport:
    """Compare the bending energy of ``surface`` against the sharp floor.

    The floor is ``avr(model) * |S^(n-1)|`` (the area ratio already
    carries the boundary-sphere aperture).  The report PASSes when the
    margin is at least ``-1e-10 * floor`` and upgrades to EQUALITY when
    the margin vanishes to relative precision *and* the end is exactly
    rigid (vanishing second derivative of the warp along the end), so
    numerically-tiny margins on non-rigid geometry stay PASS.
    """
    if surface.kind == "coordinate_sphere":
        if surface.model is not model:
            raise DomainError("surface was built on a different model")
        rigidity_residual = _end_rigidity_residual(model, surface.radius)
        where = {"r": surface.radius}
    else:
        if not _is_flat_three_space(model):
            raise DomainError(
                "spheroid surfaces live in the flat three-dimensional "
                "model only"
            )
        rigidity_residual = 0.0
        where = (
            {"radius": surface.radius}
            if surface.spheroid.is_sphere
            else {"a": surface.spheroid.a, "b": surface.spheroid.b, "xi": surface.xi}
        )
    energy = willmore_energy(surface)
    threshold = avr(model) * sphere_area(model.n - 1)
    margin = energy - threshold
    equality = (
        abs(margin) <= _EQUALITY_SLACK * max(threshold, energy)
        and rigidity_residual == 0.0
    )
    return make_report(
        suite="willmore",
        check="energy_floor",
        model=model.name,
        params={"n": model.n, **where},
        max_violation=max(0.0, -margin),
        tolerance=_MARGIN_SLACK * threshold,
        samples=1,
        equality=equality,
        detail={
            "energy": energy,
            "threshold": threshold,
            "margin": margin,
            "rigidity_residual": rigidity_residual,
        },
    )


@dataclass(frozen=True)
class KasueBounds:
    """Flux-weighted mean-curvature bound for an exterior region.

    ``bound`` is the |Du|^beta-weighted mean of H over the boundary
    sphere; H is constant there, so the mean equals the boundary value
    exactly.  ``sup_h`` is the supremum of the coordinate-sphere mean
    curvature over the end, which always includes the boundary sphere
    itself.  ``identity_residual`` is the float discrepancy between the
    direct boundary flux and its level-energy expression, which agree
    exactly in real arithmetic.  Iterates as
    (bound, sup_h, identity_residual); ``flux`` and ``weight`` keep the
    raw boundary integrals.
    """

    bound: float
    sup_h: float
    identity_residual: float
    flux: float
    weight: float

    def __iter__(self):
        yield self.bound
        yield self.sup_h
        yield self.identity_residual


def _boundary_flux_pieces(sol: RadialPotential) -> tuple[float, float, float]:
    model = sol.model
    r0 = sol.r0
    f = float(model.warp.f(r0))
    df = float(model.warp.df(r0))
    h0 = (model.n - 1) * df / f
    return h0, sol.grad_mag(r0), area_sphere(model, r0)


def _sup_mean_curvature(sol: RadialPotential, h0: float) -> float:
    # The boundary value enters as the scalar h0 rather than through the
    # vectorized profile call: elementwise transcendentals may differ
    # from the scalar path by an ulp, and the supremum must compare
    # exactly against the boundary mean when the interior stays below it.
    model = sol.model
    rs = np.geomspace(sol.r0, _SUP_FACTOR * sol.r0, _SUP_COUNT)[1:]
    hs = (model.n - 1) * np.asarray(model.warp.df(rs)) / np.asarray(model.warp.f(rs))
    return max(h0, float(np.max(hs)))


def kasue_bounds(sol: RadialPotential, beta: float) -> KasueBounds:
    """Lower bound for the boundary mean curvature from the level energy.

    Requires ``beta >= (n-2)/(n-1)``.  On a nonparabolic end the
    weighted boundary flux of H equals
    ``(1/beta) * dE(1) + ((n-1)/(n-2)) * E(1)`` where E is the level
    energy of the exterior potential; dividing by the weight gives a
    mean of H over the boundary, hence a lower bound for its supremum
    over the end.  On a parabolic end the same flux is
    ``-(1/beta)`` times the slope of the translated level energy at the
    boundary, and the resulting bound is nonnegative, vanishing exactly
    on a flat cylinder.  Both guarantees are verified and a violation
    raises ``CriterionMismatch``.
    """
    beta = float(beta)
    n = sol.model.n
    if not (math.isfinite(beta) and beta > 0.0):
        raise DomainError(f"weight exponent must be positive, got {beta!r}")
    least = (n - 2) / (n - 1)
    if beta < least * (1.0 - 1e-12):
        raise DomainError(
            f"weight exponent must be at least (n-2)/(n-1) = {least!r}, "
            f"got {beta!r}"
        )
    h0, g0, area0 = _boundary_flux_pieces(sol)
    weight = g0**beta * area0
    flux = h0 * weight
    # The weighted mean of a quantity that is constant on the surface is
    # that constant: bound = flux / weight evaluated without the float
    # round trip through the product and quotient.
    bound = h0
    if sol.kind == "nonparabolic":
        slope = du_beta(sol, beta, 1.0, with_bulk=False).d_surface
        rhs = slope / beta + ((n - 1) / (n - 2)) * u_beta(sol, beta, 1.0).value
    else:
        slope = dpsi_beta(sol, beta, 0.0, with_bulk=False).d_surface
        rhs = -slope / beta
    identity_residual = abs(flux - rhs)
    sup_h = _sup_mean_curvature(sol, h0)
    scale = max(abs(bound), abs(sup_h), 1e-300)
    if sol.kind == "nonparabolic" and not bound > 0.0:
        raise CriterionMismatch(
            f"weighted boundary mean of H must be positive on a "
            f"nonparabolic end, got {bound!r}"
        )
    if bound < -1e-12 * scale:
        raise CriterionMismatch(
            f"weighted boundary mean of H must be nonnegative, got {bound!r}"
        )
    if sup_h < bound - 1e-12 * scale:
        raise CriterionMismatch(
            f"weighted boundary mean {bound!r} exceeds the end supremum "
            f"{sup_h!r} of the mean curvature"
        )
    return KasueBounds(
        bound=bound,
        sup_h=sup_h,
        identity_residual=identity_residual,
        flux=flux,
        weight=weight,
    )


def kasue_statement_detail(
    sol: RadialPotential, beta: float, small_level: float = 1e-4
) -> dict:
    """Small-level reading of the mean-curvature bound, reported only.

    Combines the extrapolated small-level limit of the level energy with
    its slope at a small level.  The combination is informational: no
    invariant is asserted about it, in contrast to the exact boundary
    identity enforced by ``kasue_bounds``.
    """
    if sol.kind != "nonparabolic":
        raise NotApplicable(
            "the small-level reading needs a nonparabolic exterior"
        )
    lim = limit_t0(sol, beta)
    slope = du_beta(sol, beta, small_level, with_bulk=False).d_surface
    return {
        "level_limit": lim.extrapolated,
        "closed_form": lim.formula,
        "derivative_at_small_level": slope,
        "combination": lim.extrapolated + slope / float(beta),
        "small_level": float(small_level),
    }


@dataclass(frozen=True)
class DerivedConstants:
    """Sharp constants controlled by the asymptotic area ratio."""

    iso_const: float
    sobolev_const: float
    ale_infimum: float


def ale_infimum(model: ModelManifold) -> float:
    """Infimum of the bending energy over the end: avr * |S^(n-1)|."""
    return avr(model) * sphere_area(model.n - 1)


def derived_constants(model: ModelManifold) -> DerivedConstants:
    """Isoperimetric, Sobolev, and bending-energy constants of the end.

    The isoperimetric constant ``36 pi * avr`` (ratio |boundary|^3 /
    |enclosed|^2 at the optimum) and the Sobolev constant (its cube
    root) are three-dimensional statements and raise ``DomainError``
    in other dimensions; the bending-energy infimum is dimension-free
    and also available standalone as ``ale_infimum``.
    """
    if model.n != 3:
        raise DomainError(
            f"isoperimetric and Sobolev constants are defined for "
            f"three-dimensional ends only, got n = {model.n}"
        )
    iso = 36.0 * math.pi * avr(model)
    return DerivedConstants(
        iso_const=iso,
        sobolev_const=iso ** (1.0 / 3.0),
        ale_infimum=ale_infimum(model),
    )
