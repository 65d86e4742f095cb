"""Config-driven execution: work cells, worker pool, sorted artifacts.

Work is grouped into (model, suite) tasks so a single exterior solve
serves every level and exponent of that model; the cells inside a task
are independent of each other and of every other task.  Workers rebuild
models from plain-data entries — nothing crosses a process boundary but
entries going in and finished rows and reports coming out — and a single
writer sorts every artifact by explicit keys, so parallel and serial
runs emit byte-identical files.

Derivative routes: the surface and finite-difference routes are cheap
and run at every level; the bulk route (an adaptive integral over the
whole sublevel set) runs at every level on smoothed-cone cells, where
all three routes must agree, and on a fixed thinned subset of levels
elsewhere.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .config import ExperimentConfig, ModelEntry, effective_jobs
from .errors import NotApplicable
from .geometry import (
    ModelManifold,
    avr,
    sphere_area,
    volume_ball,
)
from .mcf import check_flow, flow_sphere, huisken_derivative_check, iso_ratio
from .monotone import (
    colding_a,
    default_beta_grid,
    dpsi_beta,
    du_beta,
    limit_t0,
    phi_beta,
    sharp_gradient_profile,
)
from .numerics import CumulativeIntegral, QuadSpec, integrate
from .potential import harmonic_residual, solve_exterior, verify_asymptotics
from .report import (
    FAIL,
    MCF_COLUMNS,
    MONOTONE_COLUMNS,
    CheckReport,
    make_report,
    write_checks_json,
    write_csv,
    write_summary,
)
from .willmore import check_willmore, coordinate_sphere, kasue_bounds

_GEOM_QUAD = QuadSpec(rel_tol=1e-10, abs_tol=1e-300)
_BULK_THIN_STRIDE = 8  # bulk-route level stride outside smoothed cones
_FD_FLOOR = 1e-5  # derivative-agreement denominators, in value units
_BULK_FLOOR = 1e-7
# Noise floor for the derivative sign check, in level-weighted derivative
# units relative to the series scale.  Far below the smallest level the true
# slope of a smoothing family decays beneath double precision, so quadrature
# returns signed noise there; slopes inside the floor band are treated as
# unresolved rather than as violations, which keeps the check meaningful at
# zero tolerance while still flagging any slope of resolvable magnitude.
_SIGN_FLOOR = 1e-7


@dataclass
class TaskResult:
    reports: list[CheckReport] = field(default_factory=list)
    monotone_rows: list[list] = field(default_factory=list)
    trace_rows: list[list] = field(default_factory=list)


def _tol(tolerances: dict, suite: str, check: str, default: float) -> float:
    return tolerances.get(f"{suite}.{check}", default)


def _finalize(reports: list[CheckReport], label: str, n: int) -> list[CheckReport]:
    """Stamp the run-level model label and dimension onto every report."""
    out = []
    for r in reports:
        params = {"n": n, **r.params}
        out.append(replace(r, model=label, params=params))
    return out


# ---------------------------------------------------------------------------
# geometry suite


def _geometry_reports(
    model: ModelManifold, label: str, r0: float, tolerances: dict
) -> list[CheckReport]:
    n = model.n
    warp = model.warp
    lo = max(1e-2 * r0, 2.0 * warp.r_min)
    hi = 1e4 * max(warp.tail_radius, r0)
    rs = np.geomspace(lo, hi, 160)
    s_area = sphere_area(n - 1)
    fs = np.asarray(warp.f(rs), dtype=float)
    theta_area = model.omega * fs ** (n - 1) / (s_area * rs ** (n - 1))

    ratio = avr(model)
    params = {"r0": r0}
    reports = []
    series_by_check: list[tuple[str, np.ndarray]] = [("theta_area_monotone", theta_area)]
    stub = 0.0
    table = None
    if warp.origin_closed:
        density = lambda s: np.asarray(warp.f(s), dtype=float) ** (n - 1)
        stub = integrate(density, 0.0, lo, _GEOM_QUAD)
        table = CumulativeIntegral(density, lo, _GEOM_QUAD)
        volumes = model.omega * np.array([stub + table.value(float(r)) for r in rs])
        theta_vol = n * volumes / (s_area * rs**n)
        series_by_check.insert(0, ("theta_volume_monotone", theta_vol))
    else:
        reports.append(
            make_report(
                "geometry",
                "theta_volume_monotone",
                model.name,
                params,
                0.0,
                0.0,
                0,
                not_applicable=True,
                detail={"reason": "volume from the origin needs a closed origin"},
            )
        )
    for check, series in series_by_check:
        rises = np.diff(series)
        tol = _tol(tolerances, "geometry", check, 1e-9) * float(series[0])
        viol = max(0.0, float(np.max(rises)))
        spread = float(np.max(series) - np.min(series))
        reports.append(
            make_report(
                "geometry",
                check,
                model.name,
                params,
                viol,
                tol,
                len(series),
                equality=spread <= tol,
                detail={"initial": float(series[0]), "final": float(series[-1])},
            )
        )
    reports.append(
        make_report(
            "geometry",
            "area_ratio_limit",
            model.name,
            params,
            abs(float(theta_area[-1]) - ratio),
            _tol(tolerances, "geometry", "area_ratio_limit", 1e-3),
            1,
            detail={"far_radius": float(hi), "avr": ratio},
        )
    )
    if table is not None:
        probes = [float(rs[20]), float(rs[80]), float(rs[140])]
        viol = max(
            abs(model.omega * (stub + table.value(r)) - volume_ball(model, r))
            / volume_ball(model, r)
            for r in probes
        )
        reports.append(
            make_report(
                "geometry",
                "volume_table_cross_check",
                model.name,
                params,
                viol,
                _tol(tolerances, "geometry", "volume_table_cross_check", 1e-8),
                len(probes),
            )
        )
    return reports


# ---------------------------------------------------------------------------
# potential suite


def _potential_reports(
    model: ModelManifold, label: str, r0: float, tolerances: dict
) -> list[CheckReport]:
    sol = solve_exterior(model, r0)
    params = {"r0": r0}
    reports: list[CheckReport] = []
    if sol.kind == "nonparabolic":
        reports.extend(verify_asymptotics(sol))
        sup, boundary = sharp_gradient_profile(sol)
        reports.append(
            make_report(
                "potential",
                "gradient_sup_on_boundary",
                model.name,
                params,
                max(0.0, sup - boundary) / boundary,
                _tol(tolerances, "potential", "gradient_sup_on_boundary", 1e-10),
                200,
                detail={"sup": sup, "boundary": boundary},
            )
        )
    else:
        reports.append(
            make_report(
                "potential",
                "decay_profile",
                model.name,
                params,
                0.0,
                0.0,
                0,
                not_applicable=True,
                detail={"reason": "parabolic end carries no bounded potential"},
            )
        )
    rs = np.geomspace(1.05 * r0, 1e3 * r0, 40)
    viol = max(harmonic_residual(sol, float(r)) for r in rs)
    reports.append(
        make_report(
            "potential",
            "harmonic_residual",
            model.name,
            {**params, "kind": sol.kind},
            viol,
            _tol(tolerances, "potential", "harmonic_residual", 1e-6),
            len(rs),
        )
    )
    return reports


# ---------------------------------------------------------------------------
# monotone suite


def _beta_list(n: int, betas_cfg: tuple[float, ...] | None) -> list[float]:
    if betas_cfg is None:
        return default_beta_grid(n)
    return list(betas_cfg)


def _agreement(
    levels: list[float],
    values: list[float],
    a: list[float],
    b: list[float | None],
    scale: float,
    floor: float,
) -> tuple[float, int]:
    """Worst relative disagreement of two derivative routes, level-weighted."""
    worst = 0.0
    count = 0
    for t, da, db in zip(levels, a, b):
        if da is None or db is None:
            continue
        count += 1
        denom = max(abs(t * da), abs(t * db), floor * scale)
        worst = max(worst, abs(t * (da - db)) / denom)
    return worst, count


def _sign_report(
    model_name: str,
    params: dict,
    slopes: list[float],
    scale: float,
    tolerances: dict,
) -> CheckReport:
    """Certify that every level-weighted slope points the allowed way.

    ``slopes`` are oriented so that nonnegative means admissible.  A slope
    below ``-_SIGN_FLOOR * scale`` counts as a violation; the band inside the
    floor is quadrature noise and measures exactly zero, so a configuration
    that pins ``monotone.sign`` to 0 still passes wherever the true slope is
    strictly one-signed.  The series is flagged as an equality case when no
    slope is resolvable at all.
    """
    floor = _SIGN_FLOOR * scale
    tol = _tol(tolerances, "monotone", "sign", 1e-10) * scale
    worst = max(0.0, max(-w for w in slopes) - floor)
    flat = max(abs(w) for w in slopes) <= floor + tol
    return make_report(
        "monotone",
        "sign",
        model_name,
        params,
        worst,
        tol,
        len(slopes),
        equality=flat,
        detail={"noise_floor": floor},
    )


def _monotone_nonparabolic(
    sol,
    entry: ModelEntry,
    r0: float,
    betas: list[float],
    t_pts: tuple[float, ...],
    tolerances: dict,
) -> TaskResult:
    model = sol.model
    n = model.n
    threshold = (n - 2) / (n - 1)
    levels_desc = sorted(t_pts, reverse=True)
    result = TaskResult()
    for beta in betas:
        canonical = beta >= threshold * (1.0 - 1e-12)
        full_bulk = canonical and entry.family == "smoothed_cone"
        samples = []
        hint = None
        for idx, t in enumerate(levels_desc):
            want_bulk = full_bulk or idx % _BULK_THIN_STRIDE == 0
            s = du_beta(sol, beta, t, hint, with_bulk=want_bulk)
            hint = s.r_level
            samples.append(s)
        samples.reverse()  # ascending level order
        for s in samples:
            result.monotone_rows.append(
                [
                    model.name,
                    n,
                    beta,
                    s.kind,
                    s.level,
                    s.r_level,
                    s.value,
                    s.d_surface,
                    s.d_bulk,
                    s.d_fd,
                    s.mean_curvature,
                    s.grad_conf,
                ]
            )
        values = [s.value for s in samples]
        levels = [s.level for s in samples]
        scale = values[-1]  # value at the largest level (the boundary sphere)
        params = {"beta": beta, "r0": r0, "kind": "u"}
        if canonical:
            drops = max(
                (values[i] - values[i + 1] for i in range(len(values) - 1)),
                default=0.0,
            )
            tol = _tol(tolerances, "monotone", "value_monotone", 1e-9) * scale
            spread = max(values) - min(values)
            result.reports.append(
                make_report(
                    "monotone",
                    "value_monotone",
                    model.name,
                    params,
                    max(0.0, drops),
                    tol,
                    len(values),
                    equality=spread <= tol,
                    detail={"value_scale": scale},
                )
            )
            result.reports.append(
                _sign_report(
                    model.name,
                    params,
                    [s.level * s.d_surface for s in samples],
                    scale,
                    tolerances,
                )
            )
        viol, count = _agreement(
            levels,
            values,
            [s.d_surface for s in samples],
            [s.d_fd for s in samples],
            scale,
            _FD_FLOOR,
        )
        result.reports.append(
            make_report(
                "monotone",
                "derivative_fd_agreement",
                model.name,
                params,
                viol,
                _tol(tolerances, "monotone", "derivative_fd_agreement", 1e-6),
                count,
            )
        )
        viol, count = _agreement(
            levels,
            values,
            [s.d_surface for s in samples],
            [s.d_bulk for s in samples],
            scale,
            _BULK_FLOOR,
        )
        result.reports.append(
            make_report(
                "monotone",
                "derivative_bulk_agreement",
                model.name,
                params,
                viol,
                _tol(tolerances, "monotone", "derivative_bulk_agreement", 1e-4),
                count,
            )
        )
        if canonical:
            lim = limit_t0(sol, beta)
            if avr(model) > 0.0:
                viol = abs(lim.extrapolated - lim.formula) / lim.formula
                tol = _tol(tolerances, "monotone", "limit_formula", 1e-2)
            else:
                viol = abs(lim.extrapolated)
                tol = _tol(tolerances, "monotone", "limit_formula_zero", 1e-3) * scale
            result.reports.append(
                make_report(
                    "monotone",
                    "limit_formula",
                    model.name,
                    params,
                    viol,
                    tol,
                    3,
                    detail={
                        "extrapolated": lim.extrapolated,
                        "formula": lim.formula,
                    },
                )
            )
    return result


def _log_level_reports(
    sol, r0: float, s_pts: tuple[float, ...], tolerances: dict
) -> list[CheckReport]:
    """Reparametrization identity between the log-level route and the
    annulus-average route, at the two canonical exponents."""
    model = sol.model
    n = model.n
    reports = []
    for beta in dict.fromkeys((1.0, float(n - 2))):
        worst = 0.0
        coeff = (n - 2) ** (beta + 1.0)
        for s in s_pts:
            phi = phi_beta(sol, beta, float(s))
            other = coeff * colding_a(sol, beta, math.exp(s / (n - 2)))
            worst = max(worst, abs(phi - other) / max(abs(phi), abs(other), 1e-300))
        reports.append(
            make_report(
                "monotone",
                "log_level_identity",
                model.name,
                {"beta": beta, "r0": r0, "kind": "u"},
                worst,
                _tol(tolerances, "monotone", "log_level_identity", 1e-10),
                len(s_pts),
            )
        )
    return reports


def _monotone_parabolic(
    sol,
    r0: float,
    betas: list[float],
    s_pts: tuple[float, ...],
    tolerances: dict,
) -> TaskResult:
    model = sol.model
    n = model.n
    threshold = (n - 2) / (n - 1)
    levels_asc = sorted(s_pts)
    result = TaskResult()
    for beta in betas:
        canonical = beta >= threshold * (1.0 - 1e-12)
        samples = []
        hint = None
        for idx, s_level in enumerate(levels_asc):
            want_bulk = idx % _BULK_THIN_STRIDE == 0
            s = dpsi_beta(sol, beta, s_level, hint, with_bulk=want_bulk)
            hint = s.r_level
            samples.append(s)
        for s in samples:
            result.monotone_rows.append(
                [
                    model.name,
                    n,
                    beta,
                    s.kind,
                    s.level,
                    s.r_level,
                    s.value,
                    s.d_surface,
                    s.d_bulk,
                    s.d_fd,
                    s.mean_curvature,
                    s.grad_conf,
                ]
            )
        values = [s.value for s in samples]
        # the s-derivative is compared directly: no level weighting
        levels = [1.0] * len(samples)
        scale = max(abs(values[0]), 1e-300)
        params = {"beta": beta, "r0": r0, "kind": "psi"}
        if canonical:
            rises = max(
                (values[i + 1] - values[i] for i in range(len(values) - 1)),
                default=0.0,
            )
            tol = _tol(tolerances, "monotone", "value_monotone", 1e-9) * scale
            spread = max(values) - min(values)
            result.reports.append(
                make_report(
                    "monotone",
                    "value_monotone",
                    model.name,
                    params,
                    max(0.0, rises),
                    tol,
                    len(values),
                    equality=spread <= tol,
                    detail={"value_scale": scale},
                )
            )
            result.reports.append(
                _sign_report(
                    model.name,
                    params,
                    [-s.d_surface for s in samples],
                    scale,
                    tolerances,
                )
            )
        viol, count = _agreement(
            levels,
            values,
            [s.d_surface for s in samples],
            [s.d_fd for s in samples],
            scale,
            _FD_FLOOR,
        )
        result.reports.append(
            make_report(
                "monotone",
                "derivative_fd_agreement",
                model.name,
                params,
                viol,
                _tol(tolerances, "monotone", "derivative_fd_agreement", 1e-6),
                count,
            )
        )
        viol, count = _agreement(
            levels,
            values,
            [s.d_surface for s in samples],
            [s.d_bulk for s in samples],
            scale,
            _BULK_FLOOR,
        )
        result.reports.append(
            make_report(
                "monotone",
                "derivative_bulk_agreement",
                model.name,
                params,
                viol,
                _tol(tolerances, "monotone", "derivative_bulk_agreement", 1e-4),
                count,
            )
        )
    return result


# ---------------------------------------------------------------------------
# willmore suite


def _willmore_reports(
    model: ModelManifold,
    r0: float,
    betas_cfg: tuple[float, ...] | None,
    tolerances: dict,
) -> list[CheckReport]:
    n = model.n
    reports = [check_willmore(model, coordinate_sphere(model, r0))]
    sol = solve_exterior(model, r0)
    threshold = (n - 2) / (n - 1)
    betas = [
        b
        for b in _beta_list(n, betas_cfg)
        if b >= threshold * (1.0 - 1e-12)
    ]
    for beta in betas:
        kb = kasue_bounds(sol, beta)
        params = {"beta": beta, "r0": r0}
        scale = max(abs(kb.flux), 1e-300)
        reports.append(
            make_report(
                "willmore",
                "kasue_identity",
                model.name,
                params,
                kb.identity_residual / scale,
                _tol(tolerances, "willmore", "kasue_identity", 1e-10),
                1,
                detail={"flux": kb.flux, "bound": kb.bound},
            )
        )
        reports.append(
            make_report(
                "willmore",
                "kasue_bound_ordering",
                model.name,
                params,
                max(0.0, kb.bound - kb.sup_h) / max(abs(kb.sup_h), 1.0),
                _tol(tolerances, "willmore", "kasue_bound_ordering", 1e-12),
                400,
                equality=kb.sup_h == kb.bound,
                detail={"bound": kb.bound, "sup_h": kb.sup_h},
            )
        )
    return reports


# ---------------------------------------------------------------------------
# mcf suite


def _mcf_outputs(
    model: ModelManifold, label: str, r0: float, tolerances: dict
) -> TaskResult:
    result = TaskResult()
    if model.n != 3 or not model.warp.origin_closed:
        result.reports.append(
            make_report(
                "mcf",
                "flow",
                model.name,
                {"r0": r0},
                0.0,
                0.0,
                0,
                not_applicable=True,
                detail={"reason": "flow needs a three-dimensional closed origin"},
            )
        )
        return result
    trace = flow_sphere(model, r0)
    result.reports.extend(check_flow(trace, model))
    result.reports.append(huisken_derivative_check(trace, model))
    ratio = avr(model)
    radii = [0.5 * r0, r0, 2.0 * r0, 5.0 * r0]
    values = [iso_ratio(model, r) for r in radii]
    result.reports.append(
        make_report(
            "mcf",
            "iso_ratio_floor",
            model.name,
            {"r0": r0},
            max(0.0, ratio - min(values)),
            _tol(tolerances, "mcf", "iso_ratio_floor", 1e-10),
            len(values),
            detail={"radii": radii, "values": values, "avr": ratio},
        )
    )
    for t, rho, area, vol, d in zip(
        trace.times, trace.radius, trace.area, trace.volume, trace.iso_diff
    ):
        result.trace_rows.append(
            [label, float(t), float(rho), float(area), float(vol), float(d)]
        )
    return result


# ---------------------------------------------------------------------------
# task dispatch


def _run_task(task: tuple) -> TaskResult:
    entry, suite, r0, betas_cfg, t_pts, s_pts, tolerances = task
    model = entry.build()
    label = entry.label()
    n = model.n
    if suite == "geometry":
        result = TaskResult(reports=_geometry_reports(model, label, r0, tolerances))
    elif suite == "potential":
        result = TaskResult(reports=_potential_reports(model, label, r0, tolerances))
    elif suite == "monotone":
        sol = solve_exterior(model, r0)
        betas = _beta_list(n, betas_cfg)
        if sol.kind == "nonparabolic":
            result = _monotone_nonparabolic(sol, entry, r0, betas, t_pts, tolerances)
            result.reports.extend(_log_level_reports(sol, r0, s_pts, tolerances))
        else:
            result = _monotone_parabolic(sol, r0, betas, s_pts, tolerances)
    elif suite == "willmore":
        result = TaskResult(
            reports=_willmore_reports(model, r0, betas_cfg, tolerances)
        )
    elif suite == "mcf":
        result = _mcf_outputs(model, label, r0, tolerances)
    else:  # pragma: no cover - suites validated by config
        raise NotApplicable(f"unknown suite {suite!r}")
    result.reports = _finalize(result.reports, label, n)
    for row in result.monotone_rows:
        row[0] = label
    for row in result.trace_rows:
        row[0] = label
    return result


def execute(
    config: ExperimentConfig, jobs: int | None = None
) -> tuple[list[CheckReport], list[list], list[list]]:
    """Run every (model, suite) task and return sorted outputs."""
    t_pts = config.t_grid.points()
    s_pts = config.s_grid.points()
    tasks = [
        (entry, suite, config.r0, config.betas, t_pts, s_pts, dict(config.tolerances))
        for entry in config.models
        for suite in config.suites
    ]
    workers = effective_jobs(config, jobs)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]

    reports: list[CheckReport] = []
    monotone_rows: list[list] = []
    trace_rows: list[list] = []
    for res in results:
        reports.extend(res.reports)
        monotone_rows.extend(res.monotone_rows)
        trace_rows.extend(res.trace_rows)
    monotone_rows.sort(key=lambda r: (r[0], r[1], r[2], r[3], r[4]))
    trace_rows.sort(key=lambda r: (r[0], r[1]))
    reports.sort(key=CheckReport.sort_key)
    return reports, monotone_rows, trace_rows


def run(config: ExperimentConfig, jobs: int | None = None) -> int:
    """Execute the configured run and write the four artifacts.

    Returns the process exit status: 0 when no check FAILed, 1
    otherwise — a pure function of the written reports.
    """
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    reports, monotone_rows, trace_rows = execute(config, jobs)
    write_csv(out / "monotone.csv", MONOTONE_COLUMNS, monotone_rows)
    write_checks_json(out / "checks.json", reports)
    write_csv(out / "mcf_traces.csv", MCF_COLUMNS, trace_rows)
    write_summary(out / "summary.txt", reports)
    return 1 if any(r.status == FAIL for r in reports) else 0


__all__ = ["TaskResult", "execute", "run"]
