"""Rotationally symmetric model manifolds.

A model is a warped product: metric dr^2 + f(r)^2 g_X on (r_min, inf) x X,
where X is a closed (n-1)-manifold carrying a unit-curvature metric g_X
with total area omega. Everything downstream only ever sees the warp
function f and omega, so X itself never needs coordinates.

Nonnegative Ricci curvature pins down the admissible profiles: both
radial and tangential Ricci eigenvalues must be nonnegative, which for a
warped product means f concave and f' bounded by the unit-sphere rate.
Construction enforces this by dense sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    CriterionMismatch,
    CrossCheckFailed,
    DomainError,
    Divergence,
)
from .numerics import (
    DEFAULT_QUAD,
    QuadSpec,
    integrate,
    integrate_improper,
    tail_power_estimate,
)

__all__ = [
    "WarpProfile",
    "ModelManifold",
    "sphere_area",
    "euclidean",
    "cone",
    "smoothed_cone",
    "tanh_profile",
    "cylinder_end",
    "power_profile",
    "build_model",
    "ricci_eigenvalues",
    "bishop_gromov",
    "volume_ball",
    "area_sphere",
    "avr",
    "classify_parabolicity",
    "tail_integral",
    "FAMILY_BUILDERS",
]


def sphere_area(k: int) -> float:
    """Area of the unit k-sphere."""
    if k < 1:
        raise DomainError("sphere dimension must be at least 1")
    return 2.0 * math.pi ** ((k + 1) / 2.0) / math.gamma((k + 1) / 2.0)


@dataclass(frozen=True)
class WarpProfile:
    """Warp function with first two derivatives and declared tail data.

    slope is the limit of f' at infinity (zero for bounded profiles),
    tail_power the exponent q with f(r) comparable to r^q for large r,
    and (tail_radius, tail_bound) certify |f(r)/r - slope| <= tail_bound
    for r >= tail_radius. r_min > 0 marks profiles that only define an
    exterior region; origin_closed profiles extend smoothly to r = 0 with
    f(0) = 0, f'(0) = 1.
    """

    name: str
    f: Callable
    df: Callable
    d2f: Callable
    slope: float
    tail_power: float
    tail_radius: float
    tail_bound: float
    origin_closed: bool
    r_min: float = 0.0
    params: dict = field(default_factory=dict)


def euclidean() -> WarpProfile:
    return WarpProfile(
        name="euclidean",
        f=lambda r: np.asarray(r, dtype=float),
        df=lambda r: np.ones_like(np.asarray(r, dtype=float)),
        d2f=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        slope=1.0,
        tail_power=1.0,
        tail_radius=1.0,
        tail_bound=0.0,
        origin_closed=True,
    )


def cone(alpha: float) -> WarpProfile:
    """Metric cone over a sphere shrunk by the factor alpha."""
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"cone slope must lie in (0, 1], got {alpha!r}")
    return WarpProfile(
        name=f"cone_a{alpha:g}",
        f=lambda r: alpha * np.asarray(r, dtype=float),
        df=lambda r: np.full_like(np.asarray(r, dtype=float), alpha),
        d2f=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        slope=alpha,
        tail_power=1.0,
        tail_radius=1.0,
        tail_bound=0.0,
        origin_closed=True,
        params={"alpha": alpha},
    )


def smoothed_cone(alpha: float) -> WarpProfile:
    """Cone of slope alpha with the tip smoothed to unit sphere rate.

    f(r) = alpha r + (1 - alpha)(1 - exp(-r)); the exp(-r) piece keeps
    f'(0) = 1 and decays so fast the exterior is conical to all orders.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"smoothing requires slope in (0, 1), got {alpha!r}")
    beta = 1.0 - alpha

    def f(r):
        r = np.asarray(r, dtype=float)
        # -expm1(-r) instead of 1 - exp(-r): no cancellation at small r.
        return alpha * r - beta * np.expm1(-r)

    return WarpProfile(
        name=f"smoothed_cone_a{alpha:g}",
        f=f,
        df=lambda r: alpha + beta * np.exp(-np.asarray(r, dtype=float)),
        d2f=lambda r: -beta * np.exp(-np.asarray(r, dtype=float)),
        slope=alpha,
        tail_power=1.0,
        tail_radius=10.0,
        tail_bound=beta / 10.0 * (1.0 + 1e-12),
        origin_closed=True,
        params={"alpha": alpha},
    )


def tanh_profile() -> WarpProfile:
    """Capped profile f = tanh(r): opens like a sphere, saturates at 1."""

    def d2f(r):
        r = np.asarray(r, dtype=float)
        t = np.tanh(r)
        return -2.0 * t * (1.0 - t * t)

    return WarpProfile(
        name="tanh",
        f=lambda r: np.tanh(np.asarray(r, dtype=float)),
        df=lambda r: 1.0 - np.tanh(np.asarray(r, dtype=float)) ** 2,
        d2f=d2f,
        slope=0.0,
        tail_power=0.0,
        tail_radius=10.0,
        tail_bound=0.1,
        origin_closed=True,
    )


def cylinder_end(r_min: float = 0.0) -> WarpProfile:
    """Flat cylinder: constant unit warp, no closed origin."""
    if r_min < 0.0:
        raise DomainError("cylinder r_min must be nonnegative")
    return WarpProfile(
        name="cylinder_end",
        f=lambda r: np.ones_like(np.asarray(r, dtype=float)),
        df=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        d2f=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        slope=0.0,
        tail_power=0.0,
        tail_radius=1.0,
        tail_bound=1.0,
        origin_closed=False,
        r_min=r_min,
    )


def power_profile(gamma: float) -> WarpProfile:
    """Sub-linear growth f = r^gamma on an exterior region.

    Tangential Ricci turns negative for small r, so the admissible
    domain starts at gamma^(1/(1-gamma)), where 1 - gamma^2 r^(2g-2)
    changes sign. The growth exponent must additionally exceed
    1/(n-1) for the exterior to be nonparabolic; that coupling to the
    dimension is checked at model construction.
    """
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"power exponent must lie in (0, 1), got {gamma!r}")
    r_min = gamma ** (1.0 / (1.0 - gamma))
    return WarpProfile(
        name=f"power_g{gamma:g}",
        f=lambda r: np.asarray(r, dtype=float) ** gamma,
        df=lambda r: gamma * np.asarray(r, dtype=float) ** (gamma - 1.0),
        d2f=lambda r: gamma * (gamma - 1.0) * np.asarray(r, dtype=float) ** (gamma - 2.0),
        slope=0.0,
        tail_power=gamma,
        tail_radius=100.0,
        tail_bound=1.0,
        origin_closed=False,
        r_min=r_min,
        params={"gamma": gamma},
    )


FAMILY_BUILDERS: dict[str, Callable[..., WarpProfile]] = {
    "euclidean": euclidean,
    "cone": cone,
    "smoothed_cone": smoothed_cone,
    "tanh": tanh_profile,
    "cylinder_end": cylinder_end,
    "power": power_profile,
}


# Admissibility sampling density: points per decade of r.
_GRID_PER_DECADE = 10_000
_RICCI_SLACK = 1e-12


def _admissibility_grid(profile: WarpProfile) -> np.ndarray:
    lo = max(profile.r_min, 1e-3)
    if profile.r_min > 0:
        lo = profile.r_min * (1.0 + 1e-12)
    hi = max(1e4, 10.0 * profile.tail_radius)
    decades = math.log10(hi / lo)
    count = max(int(decades * _GRID_PER_DECADE), 1000)
    return np.geomspace(lo, hi, count)


@dataclass(frozen=True)
class ModelManifold:
    """Dimension, warp profile, and cross-section area, validated."""

    n: int
    warp: WarpProfile
    omega: float

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 3:
            raise DomainError("dimension must be an integer >= 3")
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise DomainError("cross-section area must be positive and finite")
        if self.omega > sphere_area(self.n - 1) * (1.0 + 1e-12):
            raise DomainError(
                "cross-section area cannot exceed the unit sphere's; "
                "nonnegative Ricci forces the cross-section area ratio <= 1"
            )
        gamma = self.warp.params.get("gamma")
        if gamma is not None and gamma <= 1.0 / (self.n - 1):
            raise DomainError(
                f"growth exponent {gamma!r} is parabolic-borderline in "
                f"dimension {self.n}; need gamma > 1/(n-1)"
            )
        rad, tan = ricci_eigenvalues(self, _admissibility_grid(self.warp))
        worst = min(float(np.min(rad)), float(np.min(tan)))
        if worst < -_RICCI_SLACK:
            raise DomainError(
                f"profile {self.warp.name!r} violates nonnegative Ricci in "
                f"dimension {self.n}: min eigenvalue {worst:.3e}"
            )

    @property
    def name(self) -> str:
        return self.warp.name

    def area_ratio(self) -> float:
        """omega over the unit-sphere area in matching dimension."""
        return self.omega / sphere_area(self.n - 1)


def build_model(family: str, n: int, omega: float | None = None, **params) -> ModelManifold:
    """Construct a model from a family id and parameters."""
    try:
        builder = FAMILY_BUILDERS[family]
    except KeyError:
        raise DomainError(f"unknown model family {family!r}") from None
    profile = builder(**params)
    if omega is None:
        omega = sphere_area(n - 1)
    return ModelManifold(n=n, warp=profile, omega=omega)


def _check_radius(model: ModelManifold, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0) or np.any(r < model.warp.r_min):
        raise DomainError(
            f"radius must be positive and at least r_min = {model.warp.r_min!r}"
        )
    return r


def ricci_eigenvalues(model: ModelManifold, r):
    """(radial, tangential) Ricci eigenvalues at radius r.

    For dr^2 + f^2 g_X with g_X the unit round metric these are
    -(n-1) f''/f and -f''/f + (n-2)(1 - f'^2)/f^2.
    """
    r = _check_radius(model, r)
    n = model.n
    f = model.warp.f(r)
    df = model.warp.df(r)
    d2f = model.warp.d2f(r)
    rad = -(n - 1) * d2f / f
    tan = -d2f / f + (n - 2) * (1.0 - df * df) / (f * f)
    return rad, tan


def area_sphere(model: ModelManifold, r: float) -> float:
    """Area of the coordinate sphere at radius r."""
    r = float(_check_radius(model, r))
    return model.omega * float(model.warp.f(r)) ** (model.n - 1)


def volume_ball(model: ModelManifold, r: float, spec: QuadSpec = DEFAULT_QUAD) -> float:
    """Volume of the ball of radius r around the origin."""
    if not model.warp.origin_closed:
        raise DomainError("volume from the origin needs an origin-closed model")
    r = float(_check_radius(model, r))
    n = model.n
    return model.omega * integrate(lambda s: model.warp.f(s) ** (n - 1), 0.0, r, spec)


def bishop_gromov(model: ModelManifold, r: float) -> tuple[float, float]:
    """(volume ratio, area ratio) against Euclidean balls and spheres.

    Both are nonincreasing in r and start at 1 when omega equals the
    full unit-sphere area; with a smaller cross-section they start at
    omega / |S^(n-1)|.
    """
    r = float(_check_radius(model, r))
    n = model.n
    s_area = sphere_area(n - 1)
    theta_area = area_sphere(model, r) / (s_area * r ** (n - 1))
    vol = volume_ball(model, r)
    theta_vol = n * vol / (s_area * r**n)
    return theta_vol, theta_area


def avr(model: ModelManifold, cross_check: bool = True) -> float:
    """Asymptotic volume ratio.

    Closed form slope^(n-1) * omega / |S^(n-1)|; when cross_check is set
    the area ratio at 100 tail radii must agree to 1e-3.
    """
    n = model.n
    value = model.warp.slope ** (n - 1) * model.omega / sphere_area(n - 1)
    if cross_check:
        r_far = 100.0 * model.warp.tail_radius
        theta_area = area_sphere(model, r_far) / (sphere_area(n - 1) * r_far ** (n - 1))
        if abs(theta_area - value) > 1e-3:
            raise CrossCheckFailed(
                f"asymptotic volume ratio {value!r} vs area ratio "
                f"{theta_area!r} at r = {r_far!r}"
            )
    return value


def _tail_exponent_radial(model: ModelManifold) -> float:
    """Detected decay rate of f^(1-n) along the end."""
    n = model.n
    lo = max(1.0, 2.0 * model.warp.r_min)
    return tail_power_estimate(lambda s: model.warp.f(s) ** (1 - n), lo)


def classify_parabolicity(model: ModelManifold, r0: float | None = None) -> str:
    """"nonparabolic" or "parabolic", by two independent criteria.

    Radial criterion: the end carries a bounded exterior potential iff
    the integral of f^(1-n) converges. Volume criterion (origin-closed
    models): nonparabolic iff the integral of r / volume_ball(r)
    converges. Both integrability decisions come from detected tail
    powers, not from declared family data; a disagreement raises
    CriterionMismatch.
    """
    if r0 is None:
        r0 = max(1.0, 2.0 * model.warp.r_min)
    r0 = float(_check_radius(model, r0))

    k_radial = _tail_exponent_radial(model)
    radial_converges = k_radial > 1.0 + 1e-6

    if model.warp.origin_closed:
        k_volume = tail_power_estimate(lambda s: s / volume_ball(model, float(s)), 1.0)
        volume_converges = k_volume > 1.0 + 1e-6
        if radial_converges != volume_converges:
            raise CriterionMismatch(
                f"radial tail power {k_radial!r} and volume tail power "
                f"{k_volume!r} classify {model.name!r} differently"
            )
    return "nonparabolic" if radial_converges else "parabolic"


def tail_integral(model: ModelManifold, r: float, spec: QuadSpec = DEFAULT_QUAD) -> float:
    """Integral of f^(1-n) from r to infinity; Divergence when parabolic."""
    r = float(_check_radius(model, r))
    n = model.n
    k = _tail_exponent_radial(model)
    if k <= 1.0 + 1e-6:
        raise Divergence(
            f"f^(1-n) decays like s^(-{k:.3f}); the end is parabolic"
        )
    return integrate_improper(lambda s: model.warp.f(s) ** (1 - n), r, k * (1.0 - 1e-9), spec)
