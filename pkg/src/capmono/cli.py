"""Command-line entry point: run experiments, list models, spot-check.

Exit status contract: 0 when every executed check passed, 1 when any
check FAILed (or the computation itself broke down), 2 on configuration
or usage errors — always with a diagnostic naming the offending key.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import (
    SUITES,
    ExperimentConfig,
    ModelEntry,
    config_from_dict,
    load_config,
)
from .errors import CapmonoError, ConfigError
from .report import FAIL
from .runner import execute, run

_MODEL_HELP = """\
model families
--------------
family         parameters            end type                    asymptotic volume ratio
euclidean      (none)                nonparabolic                1 * area_ratio
cone           alpha in (0, 1]       nonparabolic                alpha^(n-1) * area_ratio
smoothed_cone  alpha in (0, 1)       nonparabolic                alpha^(n-1) * area_ratio
power          gamma in (1/(n-1), 1) sub-Euclidean nonparabolic  0 (degenerate growth)
tanh           (none)                parabolic                   0 (cylindrical end)
cylinder_end   (none)                parabolic                   0 (product end)

dimension: integer n >= 3 (the parabolic profiles ship as n = 3 defaults).
omega_factor in (0, 1] scales the cross-section area relative to the unit
sphere (quotient cross-sections); area_ratio above denotes that factor.
Admissibility is checked at build time: every profile must keep nonnegative
Ricci curvature in its dimension.
"""


def list_models() -> str:
    """Families, parameter ranges, and admissibility notes."""
    return _MODEL_HELP


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capmono",
        description="Verification runner for capacitary monotonicity checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the configured experiment")
    p_run.add_argument("--config", type=Path, default=None, help="TOML config file")
    p_run.add_argument("--out", type=Path, default=None, help="output directory")
    p_run.add_argument("--jobs", type=int, default=None, help="worker processes")

    sub.add_parser("list-models", help="print the model catalog")

    p_check = sub.add_parser("check", help="run one suite on one model")
    p_check.add_argument("suite", choices=SUITES)
    p_check.add_argument("--model", required=True, help="family id")
    p_check.add_argument("--n", type=int, default=3, help="dimension (default 3)")
    p_check.add_argument("--r0", type=float, default=1.0, help="boundary radius")
    p_check.add_argument(
        "--beta", type=float, action="append", default=None, help="exponent (repeatable)"
    )
    p_check.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="family parameter (repeatable)",
    )
    p_check.add_argument(
        "--omega-factor", type=float, default=None, help="cross-section area factor"
    )
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.out is not None:
        config = replace(config, output_dir=Path(args.out))
    status = run(config, jobs=args.jobs)
    out = config.output_dir
    print(f"wrote {out / 'monotone.csv'}")
    print(f"wrote {out / 'checks.json'}")
    print(f"wrote {out / 'mcf_traces.csv'}")
    print(f"wrote {out / 'summary.txt'}")
    print((out / "summary.txt").read_text(encoding="utf-8").splitlines()[2])
    return status


def _cmd_check(args) -> int:
    params: dict[str, float] = {}
    for item in args.param:
        if "=" not in item:
            raise ConfigError(
                f"config key 'param' entries must look like key=value, got {item!r}"
            )
        key, _, value = item.partition("=")
        try:
            params[key] = float(value)
        except ValueError:
            raise ConfigError(
                f"config key 'param.{key}' must be a number, got {value!r}"
            ) from None
    raw: dict = {
        "models": [
            {
                "family": args.model,
                "n": args.n,
                **({"params": params} if params else {}),
                **(
                    {"omega_factor": args.omega_factor}
                    if args.omega_factor is not None
                    else {}
                ),
            }
        ],
        "r0": args.r0,
        "suites": [args.suite],
        "parallelism": 1,
    }
    if args.beta:
        raw["betas"] = args.beta
    config = config_from_dict(raw)
    reports, _, _ = execute(config, jobs=1)
    width = max((len(f"{r.suite}.{r.check}") for r in reports), default=12)
    for r in reports:
        print(
            f"{r.suite + '.' + r.check:<{width}}  {r.model:<22} {r.status:<14} "
            f"violation={r.max_violation!r} tol={r.tolerance!r}"
        )
    return 1 if any(r.status == FAIL for r in reports) else 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list-models":
            print(list_models(), end="")
            return 0
        if args.command == "check":
            return _cmd_check(args)
    except ConfigError as exc:
        print(f"capmono: config error: {exc}", file=sys.stderr)
        return 2
    except CapmonoError as exc:
        print(f"capmono: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
