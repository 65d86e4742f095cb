"""Declarative run configuration: schema, defaults, strict validation.

A run is described by one TOML document (or nothing at all: the empty
config runs the full built-in model set with default grids).  Every key
is checked against the schema before any computation starts, and every
rejection names the offending key, so a bad config costs nothing but the
parse.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised only on 3.10
    import tomli as tomllib  # type: ignore[no-redef]

import numpy as np

from .errors import ConfigError, DomainError
from .geometry import FAMILY_BUILDERS, build_model, sphere_area

SUITES = ("geometry", "potential", "monotone", "willmore", "mcf")

_TOP_KEYS = {
    "models",
    "r0",
    "betas",
    "t_grid",
    "s_grid",
    "suites",
    "tolerances",
    "output_dir",
    "parallelism",
}
_GRID_KEYS = {"count", "spacing", "range"}
_MODEL_KEYS = {"family", "n", "params", "omega_factor"}


@dataclass(frozen=True)
class GridSpec:
    """Level grid: point count, spacing law, and inclusive range."""

    count: int
    spacing: str  # "geometric" | "linear"
    start: float
    stop: float

    def points(self) -> tuple[float, ...]:
        if self.spacing == "geometric":
            pts = np.geomspace(self.start, self.stop, self.count)
        else:
            pts = np.linspace(self.start, self.stop, self.count)
        return tuple(float(p) for p in pts)


@dataclass(frozen=True)
class ModelEntry:
    """One model request: family id, dimension, parameters, cross-section."""

    family: str
    n: int
    params: tuple[tuple[str, float], ...] = ()
    omega_factor: float | None = None

    def build(self):
        omega = None
        if self.omega_factor is not None:
            omega = self.omega_factor * sphere_area(self.n - 1)
        return build_model(self.family, self.n, omega=omega, **dict(self.params))

    def label(self) -> str:
        """Output identifier: the profile name, tagged when quotiented."""
        name = self.build().name
        if self.omega_factor is not None and self.omega_factor != 1.0:
            name = f"{name}_w{self.omega_factor:g}"
        return name


@dataclass(frozen=True)
class ExperimentConfig:
    models: tuple[ModelEntry, ...]
    r0: float = 1.0
    betas: tuple[float, ...] | None = None  # None: canonical per-model grid
    t_grid: GridSpec = GridSpec(64, "geometric", 1.0, 1e-4)
    s_grid: GridSpec = GridSpec(64, "linear", 0.0, 5.0)
    suites: tuple[str, ...] = SUITES
    tolerances: dict[str, float] = field(default_factory=dict)
    output_dir: Path = Path("out")
    parallelism: int = 0  # 0: one worker per available core


def default_models() -> tuple[ModelEntry, ...]:
    """The built-in model set covering every admissible family.

    Nonparabolic families run in dimensions 3, 4, 5; the parabolic
    profiles are three-dimensional.
    """
    entries: list[ModelEntry] = []
    for n in (3, 4, 5):
        entries.append(ModelEntry("euclidean", n))
        for alpha in (0.3, 0.5, 0.7, 0.9):
            entries.append(ModelEntry("cone", n, (("alpha", alpha),)))
        for alpha in (0.3, 0.5, 0.7):
            entries.append(ModelEntry("smoothed_cone", n, (("alpha", alpha),)))
        entries.append(ModelEntry("power", n, (("gamma", 0.6),)))
    entries.append(ModelEntry("tanh", 3))
    entries.append(ModelEntry("cylinder_end", 3))
    return tuple(entries)


def default_config() -> ExperimentConfig:
    return ExperimentConfig(models=default_models())


def effective_jobs(config: ExperimentConfig, flag: int | None = None) -> int:
    """Worker count precedence: CLI flag, CAPMONO_JOBS, config, cores."""
    if flag is not None:
        return max(1, int(flag))
    env = os.environ.get("CAPMONO_JOBS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(
                f"environment variable CAPMONO_JOBS must be an integer, got {env!r}"
            ) from None
    if config.parallelism > 0:
        return config.parallelism
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# parsing and validation


def _require_keys(table: dict, allowed: set[str], where: str) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown config key '{where}{key}'")


def _as_float(value: Any, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config key '{key}' must be a number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise ConfigError(f"config key '{key}' must be finite, got {value!r}")
    return out


def _as_int(value: Any, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"config key '{key}' must be an integer, got {value!r}")
    return value


def _parse_grid(table: Any, key: str, default: GridSpec) -> GridSpec:
    if table is None:
        return default
    if not isinstance(table, dict):
        raise ConfigError(f"config key '{key}' must be a table")
    _require_keys(table, _GRID_KEYS, f"{key}.")
    count = _as_int(table.get("count", default.count), f"{key}.count")
    if count < 2:
        raise ConfigError(f"config key '{key}.count' must be at least 2, got {count}")
    spacing = table.get("spacing", default.spacing)
    if spacing not in ("geometric", "linear"):
        raise ConfigError(
            f"config key '{key}.spacing' must be 'geometric' or 'linear', "
            f"got {spacing!r}"
        )
    rng = table.get("range")
    if rng is None:
        start, stop = default.start, default.stop
    else:
        if not (isinstance(rng, list) and len(rng) == 2):
            raise ConfigError(f"config key '{key}.range' must be a two-element list")
        start = _as_float(rng[0], f"{key}.range")
        stop = _as_float(rng[1], f"{key}.range")
    if spacing == "geometric" and (start <= 0 or stop <= 0):
        raise ConfigError(f"config key '{key}.range' must be positive for geometric spacing")
    if start == stop:
        raise ConfigError(f"config key '{key}.range' must have distinct endpoints")
    return GridSpec(count=count, spacing=spacing, start=start, stop=stop)


def _parse_model(table: Any, index: int) -> ModelEntry:
    where = f"models[{index}]."
    if not isinstance(table, dict):
        raise ConfigError(f"config key 'models[{index}]' must be a table")
    _require_keys(table, _MODEL_KEYS, where)
    family = table.get("family")
    if not isinstance(family, str):
        raise ConfigError(f"config key '{where}family' must be a string")
    if family not in FAMILY_BUILDERS:
        known = ", ".join(sorted(FAMILY_BUILDERS))
        raise ConfigError(
            f"config key '{where}family' names unknown family {family!r} "
            f"(known: {known})"
        )
    n = table.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 3:
        raise ConfigError(
            f"config key '{where}n' must be an integer >= 3, got {n!r}"
        )
    params_table = table.get("params", {})
    if not isinstance(params_table, dict):
        raise ConfigError(f"config key '{where}params' must be a table")
    params = tuple(
        sorted((str(k), _as_float(v, f"{where}params.{k}")) for k, v in params_table.items())
    )
    omega_factor = table.get("omega_factor")
    if omega_factor is not None:
        omega_factor = _as_float(omega_factor, f"{where}omega_factor")
        if not 0.0 < omega_factor <= 1.0:
            raise ConfigError(
                f"config key '{where}omega_factor' must lie in (0, 1], "
                f"got {omega_factor!r}"
            )
    entry = ModelEntry(family=family, n=n, params=params, omega_factor=omega_factor)
    # Admissibility (parameter ranges, curvature sign) is the model
    # constructor's own validation; surface its verdict as a config error
    # naming the entry before any computation is scheduled.
    try:
        entry.build()
    except DomainError as exc:
        raise ConfigError(f"config key 'models[{index}]' is inadmissible: {exc}") from exc
    except TypeError as exc:
        raise ConfigError(
            f"config key '{where}params' does not match family {family!r}: {exc}"
        ) from exc
    return entry


def config_from_dict(raw: dict, base_dir: Path | None = None) -> ExperimentConfig:
    """Validate a parsed document and produce the typed config."""
    if not isinstance(raw, dict):
        raise ConfigError("the config document must be a table at top level")
    _require_keys(raw, _TOP_KEYS, "")

    models_raw = raw.get("models")
    if models_raw is None:
        models = default_models()
    else:
        if not isinstance(models_raw, list) or not models_raw:
            raise ConfigError("config key 'models' must be a non-empty list of tables")
        models = tuple(_parse_model(entry, i) for i, entry in enumerate(models_raw))

    r0 = _as_float(raw.get("r0", 1.0), "r0")
    if r0 <= 0:
        raise ConfigError(f"config key 'r0' must be positive, got {r0!r}")

    betas_raw = raw.get("betas")
    betas: tuple[float, ...] | None = None
    if betas_raw is not None:
        if not isinstance(betas_raw, list) or not betas_raw:
            raise ConfigError("config key 'betas' must be a non-empty list of numbers")
        betas = tuple(_as_float(b, "betas") for b in betas_raw)
        for b in betas:
            if b <= 0:
                raise ConfigError(f"config key 'betas' must be positive, got {b!r}")

    t_grid = _parse_grid(raw.get("t_grid"), "t_grid", ExperimentConfig.t_grid)
    if min(t_grid.start, t_grid.stop) <= 0 or max(t_grid.start, t_grid.stop) > 1.0:
        raise ConfigError("config key 't_grid.range' must lie in (0, 1]")
    s_grid = _parse_grid(raw.get("s_grid"), "s_grid", ExperimentConfig.s_grid)
    if min(s_grid.start, s_grid.stop) < 0:
        raise ConfigError("config key 's_grid.range' must be nonnegative")

    suites_raw = raw.get("suites")
    if suites_raw is None:
        suites = SUITES
    else:
        if not isinstance(suites_raw, list) or not suites_raw:
            raise ConfigError("config key 'suites' must be a non-empty list")
        for s in suites_raw:
            if s not in SUITES:
                raise ConfigError(
                    f"config key 'suites' names unknown suite {s!r} "
                    f"(known: {', '.join(SUITES)})"
                )
        suites = tuple(dict.fromkeys(suites_raw))

    tolerances_raw = raw.get("tolerances", {})
    if not isinstance(tolerances_raw, dict):
        raise ConfigError("config key 'tolerances' must be a table")
    tolerances: dict[str, float] = {}
    for key, value in tolerances_raw.items():
        suite = key.split(".", 1)[0]
        if suite not in SUITES:
            raise ConfigError(
                f"config key 'tolerances.{key}' does not start with a known suite name"
            )
        tol = _as_float(value, f"tolerances.{key}")
        if tol < 0:
            raise ConfigError(f"config key 'tolerances.{key}' must be nonnegative")
        tolerances[key] = tol

    out_raw = raw.get("output_dir", "out")
    if not isinstance(out_raw, str) or not out_raw:
        raise ConfigError("config key 'output_dir' must be a non-empty string")
    output_dir = Path(out_raw)
    if base_dir is not None and not output_dir.is_absolute():
        output_dir = base_dir / output_dir

    parallelism = raw.get("parallelism", 0)
    parallelism = _as_int(parallelism, "parallelism")
    if parallelism < 0:
        raise ConfigError(
            f"config key 'parallelism' must be nonnegative (0 = all cores), "
            f"got {parallelism}"
        )

    return ExperimentConfig(
        models=models,
        r0=r0,
        betas=betas,
        t_grid=t_grid,
        s_grid=s_grid,
        suites=suites,
        tolerances=tolerances,
        output_dir=output_dir,
        parallelism=parallelism,
    )


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Read a TOML config file; None gives the built-in default run."""
    if path is None:
        return default_config()
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file {str(path)!r} does not exist") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {str(path)!r} is not valid TOML: {exc}") from None
    return config_from_dict(raw, base_dir=path.parent)


__all__ = [
    "SUITES",
    "GridSpec",
    "ModelEntry",
    "ExperimentConfig",
    "default_models",
    "default_config",
    "effective_jobs",
    "config_from_dict",
    "load_config",
]
