"""Monotone level-set quantities attached to exterior potentials.

For a nonparabolic end carrying the bounded potential u, the central
object is the normalized gradient energy of the level set {u = t},

    M_beta(t) = t^(-beta (n-1)/(n-2)) * integral_{u=t} |Du|^(beta+1) dA,

nondecreasing in t on nonnegative Ricci. Its derivative is computed by
three genuinely independent routes: a surface formula mixing mean
curvature and the logarithmic gradient, a bulk formula integrating
curvature and Hessian positivity over the sublevel region, and plain
finite differencing of the value route. Parabolic ends carry the
analogous (nonincreasing, unnormalized) quantity along the growing
level function psi.

Two reparametrizations of the same family are kept as separate code
paths on purpose: the log-level form (level exp(-s)) and the
inverse-root form used with the (n-2)-nd root substitution. Their
pairwise identities are part of the verified surface, so each assembles
its value from scratch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotApplicable
from .geometry import ModelManifold, avr, sphere_area
from .numerics import QuadSpec, central_diff, integrate_improper
from .potential import RadialPotential, SpheroidPotential

__all__ = [
    "MonotoneSample",
    "LimitResult",
    "u_beta",
    "du_beta",
    "psi_beta",
    "dpsi_beta",
    "phi_beta",
    "colding_a",
    "limit_t0",
    "limit_formula",
    "sharp_gradient_profile",
    "rigidity_split",
    "spheroid_u_beta",
    "spheroid_du_beta",
    "default_beta_grid",
]

# Quadrature for bulk integrals: 1e-9 relative is plenty for the 1e-4
# derivative cross-checks and much cheaper than the default spec; the
# tight absolute floor matters because small-level prefactors divide by
# the squared level.
# Sublevel integrals: relative accuracy well past the 1e-4 comparison
# budget; the absolute floor must sit above the ~2e-16 noise plateau of
# exactly-cancelling integrands (conical exteriors), which no amount of
# refinement can push lower.
BULK_QUAD = QuadSpec(rel_tol=1e-9, abs_tol=1e-15)


def default_beta_grid(n: int, exploratory: bool = True) -> list[float]:
    """Canonical exponent grid: threshold, 1, n-2, 3, plus a below-
    threshold probe that gets no monotonicity claims."""
    grid: list[float] = []
    for b in [(n - 2) / (n - 1), 1.0, float(n - 2), 3.0]:
        if not any(abs(b - g) <= 1e-12 for g in grid):
            grid.append(b)
    if exploratory:
        grid.append(0.1)
    return grid


@dataclass(frozen=True)
class MonotoneSample:
    """One row of the monotonicity ledger at a single level."""

    kind: str  # "u" or "psi"
    beta: float
    level: float
    r_level: float
    value: float
    mean_curvature: float
    grad_conf: float | None
    d_surface: float | None = None
    d_bulk: float | None = None
    d_fd: float | None = None
    fd_error: float | None = None


def _require_nonparabolic(sol: RadialPotential) -> None:
    if sol.kind != "nonparabolic":
        raise NotApplicable("u-levels only exist on nonparabolic ends")


def _require_parabolic(sol: RadialPotential) -> None:
    if sol.kind != "parabolic":
        raise NotApplicable("psi-levels only exist on parabolic ends")


def _check_beta(beta: float) -> float:
    if not (beta > 0 and math.isfinite(beta)):
        raise DomainError(f"exponent beta must be positive, got {beta!r}")
    return float(beta)


# ---------------------------------------------------------------------------
# value routes


def u_beta(
    sol: RadialPotential, beta: float, t: float, hint: float | None = None
) -> MonotoneSample:
    """Value sample of the normalized gradient energy at level t.

    Levels slightly above 1 are admitted: the radial solution continues
    inward of the boundary sphere and finite differencing at t = 1 leans
    on that extension.
    """
    _require_nonparabolic(sol)
    beta = _check_beta(beta)
    if not 0.0 < t:
        raise DomainError("level must be positive")
    model = sol.model
    n = model.n
    e = beta * (n - 1) / (n - 2)
    r = sol.level_radius(t, hint)
    # Assemble from the level value actually attained at the solved
    # radius: the root-solve error then cancels instead of being
    # amplified by the negative level powers.
    t_eff = sol.value(r)
    g = sol.grad_mag(r)
    f = float(model.warp.f(r))
    df = float(model.warp.df(r))
    area = model.omega * f ** (n - 1)
    value = t_eff**-e * g ** (beta + 1) * area
    h_mean = (n - 1) * df / f
    grad_conf = g * t_eff ** (-(n - 1) / (n - 2)) / (n - 2)
    return MonotoneSample(
        kind="u",
        beta=beta,
        level=t,
        r_level=r,
        value=value,
        mean_curvature=h_mean,
        grad_conf=grad_conf,
    )


def psi_beta(
    sol: RadialPotential, beta: float, s: float, hint: float | None = None
) -> MonotoneSample:
    """Value sample of the gradient energy along the parabolic level
    function; no level normalization in this regime."""
    _require_parabolic(sol)
    beta = _check_beta(beta)
    model = sol.model
    n = model.n
    r = sol.level_radius(s, hint)
    g = sol.grad_mag(r)
    f = float(model.warp.f(r))
    df = float(model.warp.df(r))
    value = g ** (beta + 1) * model.omega * f ** (n - 1)
    h_mean = (n - 1) * df / f
    return MonotoneSample(
        kind="psi",
        beta=beta,
        level=s,
        r_level=r,
        value=value,
        mean_curvature=h_mean,
        grad_conf=None,
    )


def phi_beta(sol: RadialPotential, beta: float, s: float) -> float:
    """Log-level route: the same family evaluated at level exp(-s),
    assembled through the conformal gradient so the reparametrization
    identity is a real cross-check rather than a tautology."""
    _require_nonparabolic(sol)
    beta = _check_beta(beta)
    if s < 0:
        raise DomainError("log-level parameter must be nonnegative")
    model = sol.model
    n = model.n
    t = math.exp(-s)
    r = sol.level_radius(t)
    t_eff = sol.value(r)
    g = sol.grad_mag(r)
    f = float(model.warp.f(r))
    p = (n - 1) / (n - 2)
    conf_grad = g / t_eff**p
    weighted_area = t_eff**p * model.omega * f ** (n - 1)
    return conf_grad ** (beta + 1) * weighted_area


def colding_a(sol: RadialPotential, beta: float, tau: float) -> float:
    """Inverse-root route: level b = tau of b = u^(-1/(n-2)).

    Assembled purely in b-variables; the identity against phi_beta at
    s = (n-2) log tau carries the (n-2)^(beta+1) factor.
    """
    _require_nonparabolic(sol)
    beta = _check_beta(beta)
    if tau < 1.0:
        raise DomainError("inverse-root levels start at 1")
    model = sol.model
    n = model.n
    t = tau ** -(n - 2)
    r = sol.level_radius(t)
    tau_eff = sol.value(r) ** (-1.0 / (n - 2))
    g = sol.grad_mag(r)
    f = float(model.warp.f(r))
    db = g * tau_eff ** (n - 1) / (n - 2)
    area = model.omega * f ** (n - 1)
    return tau_eff ** -(n - 1) * db ** (beta + 1) * area


# ---------------------------------------------------------------------------
# derivative routes


def _bulk_decay_bound(model: ModelManifold) -> float:
    """Safe declared lower bound for the decay of bulk integrands."""
    if model.warp.slope > 0:
        return 2.0
    gamma = model.warp.params.get("gamma")
    if gamma is not None:
        m = gamma * (model.n - 1) - 1.0
        return 1.0 + 0.9 * m
    return 2.0


def _u_surface_derivative(sol: RadialPotential, beta: float, r: float) -> float:
    """Level-set derivative formula, evaluated self-consistently at the
    level value attained at r (the conical cancellation in the bracket
    survives only when H and |Du|/u refer to the same surface)."""
    model = sol.model
    n = model.n
    e = beta * (n - 1) / (n - 2)
    t = sol.value(r)
    g = sol.grad_mag(r)
    f = float(model.warp.f(r))
    df = float(model.warp.df(r))
    h_mean = (n - 1) * df / f
    bracket = h_mean - (n - 1) / (n - 2) * g / t
    return beta * t**-e * g**beta * bracket * model.omega * f ** (n - 1)


def _u_bulk_derivative(sol: RadialPotential, beta: float, r_t: float) -> float:
    """Sublevel integral of the curvature-and-Hessian positivity terms.

    The radial Hessian pieces are evaluated literally (full square sums,
    not their algebraic simplification) so cancellations are exercised
    numerically instead of assumed.
    """
    model = sol.model
    n = model.n
    e = beta * (n - 1) / (n - 2)
    t = sol.value(r_t)
    coeff = beta - (n - 2) / (n - 1)
    omega = model.omega

    def integrand(r):
        r = float(r)
        u = sol.value(r)
        if u <= 0.0:
            return 0.0
        g = sol.grad_mag(r)
        f = float(model.warp.f(r))
        df = float(model.warp.df(r))
        d2f = float(model.warp.d2f(r))
        # radial derivative of |Du|
        dg = (1 - n) * f**-n * df / sol._I0
        ric_term = -(n - 1) * (d2f / f) * g * g
        hess_sq = dg * dg + (n - 1) * (df * g / f) ** 2
        kato_gap = hess_sq - (n / (n - 1)) * dg * dg
        h_mean = (n - 1) * df / f
        bracket = h_mean - (n - 1) / (n - 2) * g / u
        shape = coeff * g * g * bracket * bracket
        density = u ** (2.0 - e) * g ** (beta - 2.0)
        return density * (ric_term + kato_gap + shape) * omega * f ** (n - 1)

    # On rigid exteriors the integrand is pure cancellation noise, so an
    # absolute target must be expressed in the family's own value scale
    # or the adaptive refinement chases noise it can never beat.
    g_t = sol.grad_mag(r_t)
    f_t = float(model.warp.f(r_t))
    value_scale = t**-e * g_t ** (beta + 1.0) * omega * f_t ** (n - 1)
    spec = QuadSpec(
        rel_tol=BULK_QUAD.rel_tol,
        abs_tol=max(BULK_QUAD.abs_tol * max(value_scale, 1.0), BULK_QUAD.abs_tol),
    )
    total = integrate_improper(integrand, r_t, _bulk_decay_bound(model), spec)
    return beta / (t * t) * total


def du_beta(
    sol: RadialPotential,
    beta: float,
    t: float,
    hint: float | None = None,
    with_bulk: bool = True,
) -> MonotoneSample:
    """Full sample at level t: value plus all derivative routes."""
    base = u_beta(sol, beta, t, hint)
    r_t = base.r_level
    d_surf = _u_surface_derivative(sol, beta, r_t)
    d_bulk = _u_bulk_derivative(sol, beta, r_t) if with_bulk else None

    def val(tt: float) -> float:
        return u_beta(sol, beta, tt, hint=r_t).value

    # Wide relative step: the value route is smooth in the level, so the
    # higher-order truncation stays negligible while evaluation noise is
    # divided by a larger h. Non-strict: on conical stretches the true
    # derivative sits below evaluation noise, which is an answer, not a
    # failure.
    fd = central_diff(val, t, h0=5e-2 * t, strict=False)
    return MonotoneSample(
        kind=base.kind,
        beta=beta,
        level=t,
        r_level=r_t,
        value=base.value,
        mean_curvature=base.mean_curvature,
        grad_conf=base.grad_conf,
        d_surface=d_surf,
        d_bulk=d_bulk,
        d_fd=fd.value,
        fd_error=fd.error,
    )


def _psi_surface_derivative(sol: RadialPotential, beta: float, r: float) -> float:
    model = sol.model
    n = model.n
    g = sol.grad_mag(r)
    f = float(model.warp.f(r))
    df = float(model.warp.df(r))
    h_mean = (n - 1) * df / f
    return -beta * g**beta * h_mean * model.omega * f ** (n - 1)


def _psi_bulk_derivative(sol: RadialPotential, beta: float, r_s: float) -> float:
    model = sol.model
    n = model.n
    omega = model.omega

    def integrand(r):
        r = float(r)
        g = sol.grad_mag(r)
        f = float(model.warp.f(r))
        df = float(model.warp.df(r))
        d2f = float(model.warp.d2f(r))
        dg = (1 - n) * f**-n * df
        ric_term = -(n - 1) * (d2f / f) * g * g
        hess_sq = dg * dg + (n - 1) * (df * g / f) ** 2
        return (
            g ** (beta - 2.0)
            * (ric_term + hess_sq + (beta - 2.0) * dg * dg)
            * omega
            * f ** (n - 1)
        )

    total = integrate_improper(integrand, r_s, 2.0, BULK_QUAD)
    return -beta * total


def dpsi_beta(
    sol: RadialPotential,
    beta: float,
    s: float,
    hint: float | None = None,
    with_bulk: bool = True,
) -> MonotoneSample:
    """Full parabolic sample at level s, all derivative routes."""
    base = psi_beta(sol, beta, s, hint)
    r_s = base.r_level
    d_surf = _psi_surface_derivative(sol, beta, r_s)
    d_bulk = _psi_bulk_derivative(sol, beta, r_s) if with_bulk else None

    def val(ss: float) -> float:
        return psi_beta(sol, beta, ss, hint=r_s).value

    fd = central_diff(val, s, h0=1e-3 * max(1.0, abs(s)), strict=False)
    return MonotoneSample(
        kind=base.kind,
        beta=beta,
        level=s,
        r_level=r_s,
        value=base.value,
        mean_curvature=base.mean_curvature,
        grad_conf=None,
        d_surface=d_surf,
        d_bulk=d_bulk,
        d_fd=fd.value,
        fd_error=fd.error,
    )


# ---------------------------------------------------------------------------
# small-level limit


@dataclass(frozen=True)
class LimitResult:
    """Extrapolated small-level limit against its closed form."""

    extrapolated: float
    formula: float
    samples: tuple[float, float, float]


def limit_formula(sol: RadialPotential, beta: float) -> float:
    """Closed-form limit of the family as the level goes to zero."""
    _require_nonparabolic(sol)
    model = sol.model
    n = model.n
    ratio = avr(model)
    if ratio == 0.0:
        return 0.0
    cap = sol.capacity
    return (
        (n - 2) ** (beta + 1)
        * cap ** (1.0 - beta / (n - 2))
        * ratio ** (beta / (n - 2))
        * model.omega
    )


def limit_t0(sol: RadialPotential, beta: float) -> LimitResult:
    """Extrapolate the level-zero limit from levels 1e-2, 1e-3, 1e-4.

    Aitken acceleration on the three samples; if the differences have
    already collapsed (conical models are constant in the level) the
    last sample is the limit.
    """
    _require_nonparabolic(sol)
    beta = _check_beta(beta)
    ts = (1e-2, 1e-3, 1e-4)
    hint = None
    vals = []
    for t in ts:
        sample = u_beta(sol, beta, t, hint)
        hint = sample.r_level
        vals.append(sample.value)
    v0, v1, v2 = vals
    denom = (v2 - v1) - (v1 - v0)
    scale = max(abs(v0), abs(v1), abs(v2), 1e-300)
    if abs(denom) <= 1e-12 * scale:
        extrapolated = v2
    else:
        extrapolated = v2 - (v2 - v1) ** 2 / denom
    return LimitResult(
        extrapolated=extrapolated,
        formula=limit_formula(sol, beta),
        samples=(v0, v1, v2),
    )


# ---------------------------------------------------------------------------
# sharp gradient and rigidity decomposition


def sharp_gradient_profile(
    sol: RadialPotential, r_max_factor: float = 1e4, count: int = 200
) -> tuple[float, float]:
    """(sup over the end, boundary value) of the conformal gradient.

    The sharp bound says the sup is attained on the boundary sphere.
    """
    _require_nonparabolic(sol)
    n = sol.model.n
    p = (n - 1) / (n - 2)
    rs = np.geomspace(sol.r0, r_max_factor * sol.r0, count)
    vals = [sol.grad_mag(float(r)) / sol.value(float(r)) ** p / (n - 2) for r in rs]
    return max(vals), vals[0]


def rigidity_split(
    sol: RadialPotential, beta: float, t0: float = 1.0
) -> tuple[float, float]:
    """(bulk derivative at t0, sup of |f''| beyond the level radius).

    Both vanish together exactly when the exterior is conical; the
    second is the geometric certificate, the first the analytic one.
    """
    _require_nonparabolic(sol)
    r_t = sol.level_radius(t0)
    bulk = _u_bulk_derivative(sol, beta, r_t)
    rs = np.geomspace(r_t, 1e4 * r_t, 400)
    f2_sup = float(np.max(np.abs(sol.model.warp.d2f(rs))))
    return bulk, f2_sup


# ---------------------------------------------------------------------------
# spheroid counterparts (three-dimensional, genuinely anisotropic levels)


def spheroid_u_beta(sp: SpheroidPotential, beta: float, t: float) -> MonotoneSample:
    """Value sample on the confocal level surface u = t."""
    beta = _check_beta(beta)
    if sp.is_sphere:
        # Round boundary: the family is constant in the level.
        value = 4.0 * math.pi * sp.a ** (1.0 - beta)
        rho = sp.a / t
        return MonotoneSample(
            kind="u",
            beta=beta,
            level=t,
            r_level=rho,
            value=value,
            mean_curvature=2.0 / rho,
            grad_conf=1.0 / sp.a,
        )
    xi = sp.level_xi(t)
    integral = sp.surface_integral(
        xi, lambda eta: sp.grad_mag(xi, eta) ** (beta + 1.0)
    )
    value = t ** (-2.0 * beta) * integral
    h_max = float(sp.mean_curvature(xi, np.array([1.0 - 1e-12]))[0])
    conf = float(np.max(sp.grad_mag(xi, np.linspace(-1.0, 1.0, 101)))) / t**2
    return MonotoneSample(
        kind="u",
        beta=beta,
        level=t,
        r_level=sp.c * xi,
        value=value,
        mean_curvature=h_max,
        grad_conf=conf,
    )


def spheroid_du_beta(sp: SpheroidPotential, beta: float, t: float) -> MonotoneSample:
    """Surface and finite-difference derivative routes on a spheroid.

    No bulk route here: the sublevel region is genuinely two-dimensional
    in (xi, eta) and the surface/difference pair already pins the value.
    """
    base = spheroid_u_beta(sp, beta, t)
    if sp.is_sphere:
        return MonotoneSample(
            **{**base.__dict__, "d_surface": 0.0, "d_bulk": None, "d_fd": 0.0, "fd_error": 0.0}
        )
    xi = sp.level_xi(t)

    def surf_weight(eta):
        g = sp.grad_mag(xi, eta)
        h = sp.mean_curvature(xi, eta)
        return g**beta * (h - 2.0 * g / t)

    d_surf = beta * t ** (-2.0 * beta) * sp.surface_integral(xi, surf_weight)
    fd = central_diff(
        lambda tt: spheroid_u_beta(sp, beta, tt).value, t, h0=1e-2 * t, strict=False
    )
    return MonotoneSample(
        kind=base.kind,
        beta=beta,
        level=t,
        r_level=base.r_level,
        value=base.value,
        mean_curvature=base.mean_curvature,
        grad_conf=base.grad_conf,
        d_surface=d_surf,
        d_bulk=None,
        d_fd=fd.value,
        fd_error=fd.error,
    )
